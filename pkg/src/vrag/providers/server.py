"""HTTP server exposing the deterministic mock providers over the wire protocol.

Lets the full pipeline run against a real network boundary while staying
byte-for-byte deterministic: a response obtained over HTTP equals the response
the in-process mock would have produced for the same request.
"""

from __future__ import annotations

from .._jsonhttp import JsonHttpError, JsonHttpServer
from . import wire
from .mocks import (
    MockCaptionProvider,
    MockChatProvider,
    MockMultimodalProvider,
    MockTextEmbedProvider,
    MockTranscribeProvider,
)
from .types import DEFAULT_MM_DIM, DEFAULT_TEXT_DIM, ProviderConfig


class MockProviderServer(JsonHttpServer):
    """Serves all six provider endpoints backed by the mock implementations.

    Each response is computed with the model name the request asked for, so a
    reply obtained over the wire is byte-identical to the in-process mock
    configured with that same model name."""

    def __init__(self, port: int = 0, *, text_dim: int = DEFAULT_TEXT_DIM,
                 mm_dim: int = DEFAULT_MM_DIM) -> None:
        self._text_dim = text_dim
        self._mm_dim = mm_dim
        super().__init__({
            ("POST", wire.CHAT_PATH): self._handle_chat,
            ("POST", wire.CAPTION_PATH): self._handle_caption,
            ("POST", wire.TRANSCRIBE_PATH): self._handle_transcribe,
            ("POST", wire.EMBED_TEXT_PATH): self._handle_embed_text,
            ("POST", wire.EMBED_MM_PATH): self._handle_embed_mm,
            ("GET", wire.CAPABILITIES_PATH): self._handle_capabilities,
        }, port=port)

    def _handle_chat(self, payload: object) -> dict:
        model, turns, max_tokens = _decode(wire.decode_chat_request, payload)
        provider = MockChatProvider(ProviderConfig(model_name=model))
        return {"content": provider.chat(turns, max_tokens=max_tokens)}

    def _handle_caption(self, payload: object) -> dict:
        model, frames, transcript, instruction = _decode(
            wire.decode_caption_request, payload)
        provider = MockCaptionProvider(ProviderConfig(model_name=model))
        return {"caption": provider.caption(frames, transcript, instruction)}

    def _handle_transcribe(self, payload: object) -> dict:
        model, audio, rate = _decode(wire.decode_transcribe_request, payload)
        provider = MockTranscribeProvider(ProviderConfig(model_name=model))
        return {"transcript": provider.transcribe(audio, rate)}

    def _handle_embed_text(self, payload: object) -> dict:
        model, texts = _decode(wire.decode_embed_text_request, payload)
        provider = MockTextEmbedProvider(
            ProviderConfig(model_name=model, embed_dim=self._text_dim))
        vectors = provider.embed_text(texts)
        return {"vectors": [v.tolist() for v in vectors], "dim": self._text_dim}

    def _handle_embed_mm(self, payload: object) -> dict:
        model, frames, text = _decode(wire.decode_embed_mm_request, payload)
        provider = MockMultimodalProvider(
            ProviderConfig(model_name=model, embed_dim=self._mm_dim))
        vector = provider.embed_multimodal(frames=frames, text=text)
        return {"vector": vector.tolist(), "dim": self._mm_dim}

    def _handle_capabilities(self, payload: object) -> dict:
        return {
            "chat": True,
            "caption": True,
            "transcribe": True,
            "d_t": self._text_dim,
            "d_v": self._mm_dim,
        }


def _decode(decoder, payload):
    try:
        return decoder(payload)
    except Exception as exc:
        raise JsonHttpError(400, str(exc)) from exc
