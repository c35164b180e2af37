"""Model providers: in-process deterministic mocks and an HTTP client speaking
the same wire protocol.  ``build_suite`` picks the backend from the endpoint
URL (``mock:`` or ``http(s)://``) and bundles the five capabilities the engine
uses: chat, caption, transcribe, text embedding, multimodal embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

from .http import HttpProviderClient
from .mocks import (
    FailingProvider,
    MockCaptionProvider,
    MockChatProvider,
    MockMultimodalProvider,
    MockTextEmbedProvider,
    MockTranscribeProvider,
    ScriptedChatProvider,
    SequencedChatProvider,
)
from .types import (
    DEFAULT_MM_DIM,
    DEFAULT_TEXT_DIM,
    ChatTurn,
    EmbeddingVector,
    FrameImage,
    ProviderConfig,
    ProviderError,
    ProviderProtocolError,
    ProviderTransportError,
)

__all__ = [
    "ChatTurn",
    "EmbeddingVector",
    "FailingProvider",
    "FrameImage",
    "HttpProviderClient",
    "MockCaptionProvider",
    "MockChatProvider",
    "MockMultimodalProvider",
    "MockTextEmbedProvider",
    "MockTranscribeProvider",
    "ProviderConfig",
    "ProviderError",
    "ProviderProtocolError",
    "ProviderSuite",
    "ProviderTransportError",
    "ScriptedChatProvider",
    "SequencedChatProvider",
    "build_suite",
]


@dataclass
class ProviderSuite:
    """Bundle of capability objects plus the embedding dims they produce.

    A capability slot set to None means the backend does not offer it; calling
    the corresponding method then raises ProviderError rather than failing
    somewhere deep in the pipeline.
    """

    chat_provider: object
    caption_provider: object
    transcribe_provider: object
    text_embed_provider: object
    mm_embed_provider: object
    text_dim: int
    mm_dim: int

    def _need(self, provider: object, name: str) -> object:
        if provider is None:
            raise ProviderError(f"provider backend does not offer {name}")
        return provider

    def chat(self, turns: list[ChatTurn], max_tokens: int = 1024) -> str:
        return self._need(self.chat_provider, "chat").chat(turns, max_tokens=max_tokens)

    def caption(self, frames: list[FrameImage], transcript: str, instruction: str) -> str:
        return self._need(self.caption_provider, "caption").caption(
            frames, transcript, instruction)

    def transcribe(self, audio: bytes, sample_rate_hz: int) -> str:
        return self._need(self.transcribe_provider, "transcribe").transcribe(
            audio, sample_rate_hz)

    def embed_text(self, texts: list[str]) -> list[EmbeddingVector]:
        return self._need(self.text_embed_provider, "text embedding").embed_text(texts)

    def embed_multimodal(self, *, frames: list[FrameImage] | None = None,
                         text: str | None = None) -> EmbeddingVector:
        return self._need(self.mm_embed_provider, "multimodal embedding").embed_multimodal(
            frames=frames, text=text)


def build_suite(config: ProviderConfig, *, text_dim: int = DEFAULT_TEXT_DIM,
                mm_dim: int = DEFAULT_MM_DIM) -> ProviderSuite:
    """Build a suite from one endpoint.

    ``mock:`` endpoints get the in-process mocks.  HTTP endpoints get one
    shared client; its /v1/capabilities reply decides which slots are live and
    overrides the embedding dims.
    """
    if config.is_mock:
        def sub(model: str, dim: int | None = None) -> ProviderConfig:
            return ProviderConfig(
                endpoint_url=config.endpoint_url,
                model_name=f"{config.model_name}/{model}",
                timeout_s=config.timeout_s,
                max_concurrency=config.max_concurrency,
                retry_count=config.retry_count,
                embed_dim=dim,
            )

        return ProviderSuite(
            chat_provider=MockChatProvider(sub("chat")),
            caption_provider=MockCaptionProvider(sub("caption")),
            transcribe_provider=MockTranscribeProvider(sub("asr")),
            text_embed_provider=MockTextEmbedProvider(sub("text-embed", text_dim)),
            mm_embed_provider=MockMultimodalProvider(sub("mm-embed", mm_dim)),
            text_dim=text_dim,
            mm_dim=mm_dim,
        )

    client = HttpProviderClient(config)
    caps = client.capabilities()
    return ProviderSuite(
        chat_provider=client if caps["chat"] else None,
        caption_provider=client if caps["caption"] else None,
        transcribe_provider=client if caps["transcribe"] else None,
        text_embed_provider=client if caps["d_t"] > 0 else None,
        mm_embed_provider=client if caps["d_v"] > 0 else None,
        text_dim=caps["d_t"],
        mm_dim=caps["d_v"],
    )
