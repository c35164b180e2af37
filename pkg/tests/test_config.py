"""Engine configuration defaults, validation, per-capability provider
overrides, and file/env loading."""

from __future__ import annotations

import json

import pytest

from vrag.config import (
    CONFIG_ENV_VAR,
    ConfigError,
    EngineConfig,
    config_from_json,
    load_config,
)
from vrag.providers import ProviderConfig


def test_defaults():
    cfg = EngineConfig()
    assert cfg.clip_len_s == 30.0
    assert cfg.k == 5
    assert cfg.k_hat == 15
    assert cfg.token_threshold == 1200
    assert cfg.synthesis_threshold == 4
    assert cfg.top_e == 20
    assert cfg.top_c == 10
    assert cfg.visual_k == 10
    assert cfg.top_h == 5
    assert cfg.combination_mode == "intersection_else_union"
    assert cfg.budget_tokens == 6000
    assert cfg.provider.is_mock


def test_validation_errors():
    with pytest.raises(ConfigError, match="clip_len_s"):
        EngineConfig(clip_len_s=0)
    with pytest.raises(ConfigError, match="k_hat must exceed k"):
        EngineConfig(k=5, k_hat=5)
    with pytest.raises(ConfigError, match="top_e"):
        EngineConfig(top_e=0)
    with pytest.raises(ConfigError, match="combination_mode"):
        EngineConfig(combination_mode="sometimes")
    with pytest.raises(ConfigError, match="capability"):
        EngineConfig(provider_overrides={"paint": {"model_name": "x"}})


def test_provider_for_applies_partial_overrides():
    cfg = EngineConfig(
        provider=ProviderConfig(endpoint_url="http://host:9000", model_name="base"),
        provider_overrides={"caption": {"model_name": "vlm-large"}})
    assert cfg.provider_for("chat") == cfg.provider
    caption = cfg.provider_for("caption")
    assert caption.model_name == "vlm-large"
    assert caption.endpoint_url == "http://host:9000"  # base fields survive
    with pytest.raises(ConfigError, match="capability"):
        cfg.provider_for("paint")


def test_snapshot_lists_pipeline_constants():
    snap = EngineConfig().snapshot()
    assert snap["clip_len_s"] == 30.0
    assert snap["k"] == 5
    assert snap["k_hat"] == 15
    assert "endpoint_url" not in json.dumps(snap)  # no provider details leak


def test_config_from_json_round_trip():
    cfg = config_from_json({
        "clip_len_s": 20.0,
        "k": 3,
        "k_hat": 9,
        "provider": {"endpoint_url": "http://h:1", "model_name": "m"},
        "provider_overrides": {"chat": {"model_name": "chatty"}},
    })
    assert cfg.clip_len_s == 20.0
    assert cfg.provider.model_name == "m"
    assert cfg.provider_for("chat").model_name == "chatty"


def test_config_from_json_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config keys.*clip_length"):
        config_from_json({"clip_length": 30})
    with pytest.raises(ConfigError, match="unknown provider keys"):
        config_from_json({"provider": {"url": "http://h"}})
    with pytest.raises(ConfigError, match="root"):
        config_from_json([1, 2])


def test_load_config_precedence(tmp_path, monkeypatch):
    explicit = tmp_path / "explicit.json"
    explicit.write_text(json.dumps({"k": 4, "k_hat": 8}))
    env_file = tmp_path / "env.json"
    env_file.write_text(json.dumps({"k": 2, "k_hat": 6}))

    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    assert load_config() == EngineConfig()          # defaults
    monkeypatch.setenv(CONFIG_ENV_VAR, str(env_file))
    assert load_config().k == 2                     # env fallback
    assert load_config(explicit).k == 4             # explicit path wins


def test_load_config_errors(tmp_path, monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)
