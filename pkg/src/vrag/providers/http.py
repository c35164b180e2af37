"""HTTP client for remote provider endpoints.

Retries transport-level failures with doubling backoff (0.5 s start, 8 s cap);
protocol-level failures (malformed payloads, HTTP 4xx) are not retried.  A
semaphore bounds in-flight requests per client at ``config.max_concurrency``.
"""

from __future__ import annotations

import json
import threading
import time
from typing import Callable

import requests

from . import wire
from .types import (
    ChatTurn,
    EmbeddingVector,
    FrameImage,
    ProviderConfig,
    ProviderProtocolError,
    ProviderTransportError,
    require_chat_turns,
    require_chronological,
)

BACKOFF_INITIAL_S = 0.5
BACKOFF_CAP_S = 8.0


class HttpProviderClient:
    """Talks the wire protocol to a provider server at ``config.endpoint_url``."""

    def __init__(self, config: ProviderConfig, *,
                 session: requests.Session | None = None,
                 sleep: Callable[[float], None] = time.sleep) -> None:
        if config.is_mock:
            raise ValueError("HttpProviderClient requires an http(s) endpoint")
        self.config = config
        self._session = session or requests.Session()
        self._sleep = sleep
        self._slots = threading.Semaphore(config.max_concurrency)

    def _url(self, path: str) -> str:
        return self.config.endpoint_url.rstrip("/") + path

    def _roundtrip(self, method: str, path: str, payload: dict | None) -> object:
        attempts = self.config.retry_count + 1
        backoff = BACKOFF_INITIAL_S
        last_exc: Exception | None = None
        for attempt in range(attempts):
            if attempt > 0:
                self._sleep(backoff)
                backoff = min(backoff * 2, BACKOFF_CAP_S)
            try:
                with self._slots:
                    if method == "GET":
                        resp = self._session.get(self._url(path),
                                                 timeout=self.config.timeout_s)
                    else:
                        resp = self._session.post(self._url(path), json=payload,
                                                  timeout=self.config.timeout_s)
            except requests.RequestException as exc:
                last_exc = exc
                continue
            if resp.status_code >= 500:
                last_exc = ProviderTransportError(
                    f"{path} returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProviderProtocolError(
                    f"{path} returned {resp.status_code}", _safe_body(resp))
            try:
                return resp.json()
            except (json.JSONDecodeError, ValueError) as exc:
                raise ProviderProtocolError(
                    f"{path} returned non-JSON body: {exc}", _safe_body(resp)) from exc
        raise ProviderTransportError(
            f"{path} failed after {attempts} attempts: {last_exc}")

    def chat(self, turns: list[ChatTurn], max_tokens: int = 1024) -> str:
        require_chat_turns(turns)
        payload = wire.encode_chat_request(self.config.model_name, turns, max_tokens)
        return wire.decode_chat_response(self._roundtrip("POST", wire.CHAT_PATH, payload))

    def caption(self, frames: list[FrameImage], transcript: str, instruction: str) -> str:
        require_chronological(frames)
        payload = wire.encode_caption_request(
            self.config.model_name, frames, transcript, instruction)
        return wire.decode_caption_response(
            self._roundtrip("POST", wire.CAPTION_PATH, payload))

    def transcribe(self, audio: bytes, sample_rate_hz: int) -> str:
        if sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        payload = wire.encode_transcribe_request(
            self.config.model_name, audio, sample_rate_hz)
        return wire.decode_transcribe_response(
            self._roundtrip("POST", wire.TRANSCRIBE_PATH, payload))

    def embed_text(self, texts: list[str]) -> list[EmbeddingVector]:
        payload = wire.encode_embed_text_request(self.config.model_name, texts)
        vectors = wire.decode_embed_text_response(
            self._roundtrip("POST", wire.EMBED_TEXT_PATH, payload))
        if len(vectors) != len(texts):
            raise ProviderProtocolError(
                f"embed_text returned {len(vectors)} vectors for {len(texts)} texts",
                None)
        return vectors

    def embed_multimodal(self, *, frames: list[FrameImage] | None = None,
                         text: str | None = None) -> EmbeddingVector:
        if (frames is None) == (text is None):
            raise ValueError("provide exactly one of frames or text")
        if frames is not None:
            require_chronological(frames)
        payload = wire.encode_embed_mm_request(self.config.model_name, frames, text)
        return wire.decode_embed_mm_response(
            self._roundtrip("POST", wire.EMBED_MM_PATH, payload))

    def capabilities(self) -> dict:
        return wire.decode_capabilities_response(
            self._roundtrip("GET", wire.CAPABILITIES_PATH, None))


def _safe_body(resp: requests.Response) -> str:
    try:
        return resp.text[:500]
    except Exception:
        return "<unreadable body>"
