"""Engine configuration: pipeline constants plus provider endpoints, loadable
from a JSON file (or the VRAG_CONFIG environment variable as fallback).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .providers.types import DEFAULT_MM_DIM, DEFAULT_TEXT_DIM, ProviderConfig
from .retrieval import COMBINATION_MODES, DEFAULT_COMBINATION_MODE

CONFIG_ENV_VAR = "VRAG_CONFIG"
CAPABILITIES = ("chat", "caption", "transcribe", "embed_text", "embed_mm")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class EngineConfig:
    provider: ProviderConfig = ProviderConfig()
    # partial per-capability overrides of the base provider block
    provider_overrides: dict = field(default_factory=dict)
    clip_len_s: float = 30.0
    k: int = 5
    k_hat: int = 15
    token_threshold: int = 1200
    synthesis_threshold: int = 4
    top_e: int = 20
    top_c: int = 10
    visual_k: int = 10
    top_h: int = 5
    combination_mode: str = DEFAULT_COMBINATION_MODE
    budget_tokens: int = 6000
    text_dim: int = DEFAULT_TEXT_DIM
    mm_dim: int = DEFAULT_MM_DIM
    seed: int = 0  # reserved for components that sample; the engine itself is deterministic

    def __post_init__(self) -> None:
        if self.clip_len_s <= 0:
            raise ConfigError("clip_len_s must be positive")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.k_hat <= self.k:
            raise ConfigError(f"k_hat must exceed k ({self.k_hat} <= {self.k})")
        for name in ("token_threshold", "synthesis_threshold", "top_e", "top_c",
                     "visual_k", "top_h", "budget_tokens", "text_dim", "mm_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.combination_mode not in COMBINATION_MODES:
            raise ConfigError(
                f"combination_mode must be one of {COMBINATION_MODES}")
        for capability in self.provider_overrides:
            if capability not in CAPABILITIES:
                raise ConfigError(f"unknown provider capability {capability!r}")

    def provider_for(self, capability: str) -> ProviderConfig:
        """Base provider block with any per-capability override applied."""
        if capability not in CAPABILITIES:
            raise ConfigError(f"unknown provider capability {capability!r}")
        override = self.provider_overrides.get(capability)
        if not override:
            return self.provider
        return replace(self.provider, **override)

    def snapshot(self) -> dict:
        """Pipeline constants recorded in the index metadata."""
        return {
            "clip_len_s": self.clip_len_s, "k": self.k, "k_hat": self.k_hat,
            "token_threshold": self.token_threshold,
            "synthesis_threshold": self.synthesis_threshold,
            "top_e": self.top_e, "top_c": self.top_c, "visual_k": self.visual_k,
            "top_h": self.top_h, "combination_mode": self.combination_mode,
            "budget_tokens": self.budget_tokens, "seed": self.seed,
        }


def _provider_from_json(obj: dict) -> ProviderConfig:
    allowed = {"endpoint_url", "model_name", "timeout_s", "max_concurrency",
               "retry_count", "embed_dim"}
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown provider keys: {sorted(unknown)}")
    return ProviderConfig(**obj)


def config_from_json(obj: dict) -> EngineConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config root must be a JSON object")
    kwargs: dict = {}
    known = {f for f in EngineConfig.__dataclass_fields__}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, value in obj.items():
        if key == "provider":
            kwargs["provider"] = _provider_from_json(value)
        elif key == "provider_overrides":
            if not isinstance(value, dict):
                raise ConfigError("provider_overrides must be an object")
            kwargs["provider_overrides"] = value
        else:
            kwargs[key] = value
    try:
        return EngineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Load config from an explicit path, else $VRAG_CONFIG, else defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is None:
        return EngineConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return config_from_json(json.loads(path.read_text("utf-8")))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
