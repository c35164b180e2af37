"""Shared provider types: configs, chat turns, frames, embedding vectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CHAT_ROLES = ("system", "user", "assistant")
FRAME_MEDIA_TYPES = ("jpeg", "png")

# Mock embedding dimensions used when a config does not override them.
DEFAULT_TEXT_DIM = 256
DEFAULT_MM_DIM = 128


class ProviderError(Exception):
    """Base class for provider failures."""


class ProviderTransportError(ProviderError):
    """Transport-level failure (connect/timeout/5xx), raised once retries are spent."""


class ProviderProtocolError(ProviderError):
    """Malformed request or response; carries the offending payload."""

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings for one model capability.

    ``endpoint_url`` selects the implementation: the ``mock:`` scheme yields
    the deterministic in-process provider, anything ``http(s)://`` the wire
    client. ``embed_dim`` fixes the mock embedding dimension; real endpoints
    report their own dims via the capabilities call.
    """

    endpoint_url: str = "mock:"
    model_name: str = "mock-model"
    timeout_s: float = 30.0
    max_concurrency: int = 4
    retry_count: int = 2
    embed_dim: int | None = None

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        if self.retry_count < 0:
            raise ValueError("retry_count must be >= 0")

    @property
    def is_mock(self) -> bool:
        return self.endpoint_url.startswith("mock:")


@dataclass(frozen=True)
class ChatTurn:
    role: str
    text: str

    def __post_init__(self):
        if self.role not in CHAT_ROLES:
            raise ValueError(f"unknown chat role: {self.role!r}")
        if self.role == "user" and not self.text:
            raise ValueError("user turns must have non-empty text")


@dataclass(frozen=True)
class FrameImage:
    """A single sampled frame: encoded image bytes plus its source timestamp."""

    media_type: str
    data: bytes
    timestamp_s: float

    def __post_init__(self):
        if self.media_type not in FRAME_MEDIA_TYPES:
            raise ValueError(f"unsupported media type: {self.media_type!r}")
        if not self.data:
            raise ValueError("frame bytes must be non-empty")
        if self.timestamp_s < 0:
            raise ValueError("timestamp_s must be >= 0")


@dataclass
class EmbeddingVector:
    """Fixed-dimension real vector; values are float32 and always finite."""

    values: np.ndarray
    dim: int = field(default=0)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 1:
            raise ValueError("embedding values must be one-dimensional")
        if self.dim == 0:
            self.dim = int(values.shape[0])
        if values.shape[0] != self.dim:
            raise ValueError(f"expected dim {self.dim}, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding values must be finite")
        self.values = values

    def tolist(self) -> list[float]:
        return [float(x) for x in self.values]


def require_chat_turns(turns: list[ChatTurn]) -> None:
    """Validate the chat precondition: non-empty, ends with a user turn."""
    if not turns:
        raise ValueError("chat requires at least one turn")
    if turns[-1].role != "user":
        raise ValueError("chat turns must end with a user turn")


def require_chronological(frames: list[FrameImage]) -> None:
    """Validate that frames are in non-decreasing timestamp order."""
    if not frames:
        raise ValueError("at least one frame is required")
    for prev, cur in zip(frames, frames[1:]):
        if cur.timestamp_s < prev.timestamp_s:
            raise ValueError("frames must be in chronological timestamp order")
