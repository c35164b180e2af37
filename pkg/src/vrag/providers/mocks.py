"""Deterministic mock providers.

Every mock is a pure function of its canonicalized request, so repeated
calls are byte-identical and tests can compute expected outputs on their
own. Canonical forms (hashed with SHA-256, ``hex8`` = first 8 hex digits):

* chat:       ``"model=" + model + "\\n"`` then per turn
              ``"role=" + role + "\\ncontent=" + text + "\\n"`` then
              ``"max_tokens=" + str(max_tokens)``;
              reply ``MOCK-CHAT(sha=<hex8>)``.
* caption:    reply ``MOCK-CAPTION(n=<frames>,t=<hex8(transcript)>,i=<hex8(instruction)>)``.
* transcribe: reply ``MOCK-ASR(<hex8(audio)>)``; an all-zero audio blob is
              the silence sentinel and yields ``""``.
* embed_text: per text, a hash-seeded unit vector from seed
              ``"text\\n" + model + "\\n" + text``.
* embed_mm:   a hash-seeded unit vector from seed ``"mm\\n" + model + "\\n" + token``
              where the scene token is shared between modalities: text
              payloads drop a leading ``SCENE:`` prefix, and frames whose
              bytes start with ``TAG:`` contribute their tag. A text
              ``SCENE:x`` therefore lands on the same vector as frames
              tagged ``x``.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .types import (
    DEFAULT_MM_DIM,
    DEFAULT_TEXT_DIM,
    ChatTurn,
    EmbeddingVector,
    FrameImage,
    ProviderConfig,
    ProviderTransportError,
    require_chat_turns,
    require_chronological,
)

_FRAME_TAG_PREFIX = b"TAG:"
_SCENE_PREFIX = "SCENE:"


def hex8(data: bytes | str) -> str:
    """First 8 hex digits of the SHA-256 of ``data`` (strings as UTF-8)."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:8]


def canonical_chat_request(model: str, turns: list[ChatTurn], max_tokens: int) -> str:
    parts = [f"model={model}\n"]
    for turn in turns:
        parts.append(f"role={turn.role}\ncontent={turn.text}\n")
    parts.append(f"max_tokens={max_tokens}")
    return "".join(parts)


def hash_unit_vector(seed: str, dim: int) -> np.ndarray:
    """Deterministic float32 unit vector derived from ``seed`` by hash expansion."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    raw = bytearray()
    counter = 0
    while len(raw) < dim * 8:
        raw += hashlib.sha256(f"{seed}#{counter}".encode("utf-8")).digest()
        counter += 1
    ints = np.frombuffer(bytes(raw[: dim * 8]), dtype="<u8")
    vals = ints.astype(np.float64) / float(2**64) * 2.0 - 1.0
    vals = vals / np.linalg.norm(vals)
    return vals.astype(np.float32)


def scene_token_for_text(text: str) -> str:
    if text.startswith(_SCENE_PREFIX):
        return text[len(_SCENE_PREFIX):]
    return text


def scene_token_for_frames(frames: list[FrameImage]) -> str | None:
    """The shared-space token for a frame list, or None if any frame is untagged."""
    tags = []
    for frame in frames:
        if not frame.data.startswith(_FRAME_TAG_PREFIX):
            return None
        tags.append(frame.data[len(_FRAME_TAG_PREFIX):].decode("utf-8", "replace"))
    unique: list[str] = []
    for tag in tags:
        if tag not in unique:
            unique.append(tag)
    return "|".join(unique)


def _frames_digest(frames: list[FrameImage]) -> str:
    h = hashlib.sha256()
    for frame in frames:
        h.update(frame.media_type.encode("utf-8"))
        h.update(frame.data)
        h.update(repr(frame.timestamp_s).encode("utf-8"))
    return h.hexdigest()


class MockChatProvider:
    def __init__(self, config: ProviderConfig):
        self.config = config

    def chat(self, turns: list[ChatTurn], max_tokens: int = 1024) -> str:
        require_chat_turns(turns)
        if max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        canonical = canonical_chat_request(self.config.model_name, turns, max_tokens)
        return f"MOCK-CHAT(sha={hex8(canonical)})"


class MockCaptionProvider:
    def __init__(self, config: ProviderConfig):
        self.config = config

    def caption(self, frames: list[FrameImage], transcript: str, instruction: str) -> str:
        require_chronological(frames)
        return f"MOCK-CAPTION(n={len(frames)},t={hex8(transcript)},i={hex8(instruction)})"


class MockTranscribeProvider:
    def __init__(self, config: ProviderConfig):
        self.config = config

    def transcribe(self, audio: bytes, sample_rate_hz: int) -> str:
        if not audio:
            raise ValueError("audio must be non-empty")
        if sample_rate_hz < 1:
            raise ValueError("sample_rate_hz must be >= 1")
        if all(b == 0 for b in audio):
            return ""
        return f"MOCK-ASR({hex8(audio)})"


class MockTextEmbedProvider:
    def __init__(self, config: ProviderConfig):
        self.config = config
        self.dim = config.embed_dim or DEFAULT_TEXT_DIM

    def embed_text(self, texts: list[str]) -> list[EmbeddingVector]:
        for text in texts:
            if not text:
                raise ValueError("texts must be non-empty")
        model = self.config.model_name
        return [
            EmbeddingVector(hash_unit_vector(f"text\n{model}\n{text}", self.dim))
            for text in texts
        ]


class MockMultimodalProvider:
    def __init__(self, config: ProviderConfig):
        self.config = config
        self.dim = config.embed_dim or DEFAULT_MM_DIM

    def embed_multimodal(
        self,
        frames: list[FrameImage] | None = None,
        text: str | None = None,
    ) -> EmbeddingVector:
        if (frames is None) == (text is None):
            raise ValueError("exactly one of frames or text must be given")
        if text is not None:
            token = f"scene:{scene_token_for_text(text)}"
        else:
            require_chronological(frames)
            tag_token = scene_token_for_frames(frames)
            if tag_token is not None:
                token = f"scene:{tag_token}"
            else:
                token = f"frames:{_frames_digest(frames)}"
        model = self.config.model_name
        return EmbeddingVector(hash_unit_vector(f"mm\n{model}\n{token}", self.dim))


class ScriptedChatProvider:
    """Chat provider answering from substring-keyed rules; used in tests.

    Each rule is ``(needles, reply)``: the first rule whose needles all occur
    in the concatenated prompt text wins. Falls back to the deterministic
    mock template when nothing matches and no default is set.
    """

    def __init__(
        self,
        rules: list[tuple[tuple[str, ...], str]] | None = None,
        default: str | None = None,
        config: ProviderConfig | None = None,
    ):
        self.rules = rules or []
        self.default = default
        self.config = config or ProviderConfig(model_name="scripted-chat")
        self._fallback = MockChatProvider(self.config)
        self.calls: list[str] = []

    def chat(self, turns: list[ChatTurn], max_tokens: int = 1024) -> str:
        require_chat_turns(turns)
        prompt = "\n".join(turn.text for turn in turns)
        self.calls.append(prompt)
        for needles, reply in self.rules:
            if all(needle in prompt for needle in needles):
                return reply
        if self.default is not None:
            return self.default
        return self._fallback.chat(turns, max_tokens)


class SequencedChatProvider:
    """Chat provider replaying a fixed list of replies in call order (the last
    reply repeats); used to test retry paths."""

    def __init__(self, replies: list[str],
                 config: ProviderConfig | None = None):
        if not replies:
            raise ValueError("replies must be non-empty")
        self.replies = list(replies)
        self.config = config or ProviderConfig(model_name="sequenced-chat")
        self.calls: list[str] = []

    def chat(self, turns: list[ChatTurn], max_tokens: int = 1024) -> str:
        require_chat_turns(turns)
        self.calls.append("\n".join(turn.text for turn in turns))
        index = min(len(self.calls) - 1, len(self.replies) - 1)
        return self.replies[index]


class FailingProvider:
    """Raises a transport error from every capability method; used in tests."""

    def __init__(self, message: str = "provider unavailable"):
        self.message = message
        self.calls = 0

    def _fail(self):
        self.calls += 1
        raise ProviderTransportError(self.message)

    def chat(self, turns, max_tokens=1024):
        self._fail()

    def caption(self, frames, transcript, instruction):
        self._fail()

    def transcribe(self, audio, sample_rate_hz):
        self._fail()

    def embed_text(self, texts):
        self._fail()

    def embed_multimodal(self, frames=None, text=None):
        self._fail()
