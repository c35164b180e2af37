"""Wire protocol for provider endpoints: request/response encoding and validation.

Schemas (all floats are plain decimal JSON numbers, binary is base64):

    POST /v1/chat        {model, messages:[{role, content}], max_tokens} -> {content}
    POST /v1/caption     {model, frames:[{media_type, data_b64, timestamp_s}],
                          transcript, instruction} -> {caption}
    POST /v1/transcribe  {model, audio_b64, sample_rate_hz} -> {transcript}
    POST /v1/embed_text  {model, texts:[...]} -> {vectors:[[...], ...], dim}
    POST /v1/embed_mm    {model, frames:[...] | text} -> {vector:[...], dim}
    GET  /v1/capabilities -> {chat, caption, transcribe, d_t, d_v}
"""

from __future__ import annotations

import base64
import binascii

import numpy as np

from .types import ChatTurn, EmbeddingVector, FrameImage, ProviderProtocolError

CHAT_PATH = "/v1/chat"
CAPTION_PATH = "/v1/caption"
TRANSCRIBE_PATH = "/v1/transcribe"
EMBED_TEXT_PATH = "/v1/embed_text"
EMBED_MM_PATH = "/v1/embed_mm"
CAPABILITIES_PATH = "/v1/capabilities"


def _require(cond: bool, message: str, payload: object) -> None:
    if not cond:
        raise ProviderProtocolError(message, payload)


def encode_frame(frame: FrameImage) -> dict:
    return {
        "media_type": frame.media_type,
        "data_b64": base64.b64encode(frame.data).decode("ascii"),
        "timestamp_s": float(frame.timestamp_s),
    }


def decode_frame(obj: object) -> FrameImage:
    _require(isinstance(obj, dict), "frame must be an object", obj)
    for key in ("media_type", "data_b64", "timestamp_s"):
        _require(key in obj, f"frame missing {key}", obj)
    try:
        data = base64.b64decode(obj["data_b64"], validate=True)
    except (binascii.Error, TypeError) as exc:
        raise ProviderProtocolError(f"invalid frame base64: {exc}", obj) from exc
    try:
        return FrameImage(obj["media_type"], data, float(obj["timestamp_s"]))
    except (ValueError, TypeError) as exc:
        raise ProviderProtocolError(f"invalid frame: {exc}", obj) from exc


def encode_chat_request(model: str, turns: list[ChatTurn], max_tokens: int) -> dict:
    return {
        "model": model,
        "messages": [{"role": t.role, "content": t.text} for t in turns],
        "max_tokens": int(max_tokens),
    }


def decode_chat_request(payload: object) -> tuple[str, list[ChatTurn], int]:
    _require(isinstance(payload, dict), "chat request must be an object", payload)
    for key in ("model", "messages", "max_tokens"):
        _require(key in payload, f"chat request missing {key}", payload)
    _require(isinstance(payload["messages"], list), "messages must be a list", payload)
    turns = []
    for msg in payload["messages"]:
        _require(isinstance(msg, dict) and "role" in msg and "content" in msg,
                 "message must have role and content", payload)
        try:
            turns.append(ChatTurn(msg["role"], msg["content"]))
        except ValueError as exc:
            raise ProviderProtocolError(f"invalid chat turn: {exc}", payload) from exc
    _require(isinstance(payload["max_tokens"], int), "max_tokens must be an integer", payload)
    return payload["model"], turns, payload["max_tokens"]


def decode_chat_response(payload: object) -> str:
    _require(isinstance(payload, dict) and "content" in payload,
             "chat response must contain content", payload)
    _require(isinstance(payload["content"], str), "content must be a string", payload)
    return payload["content"]


def encode_caption_request(model: str, frames: list[FrameImage],
                           transcript: str, instruction: str) -> dict:
    return {
        "model": model,
        "frames": [encode_frame(f) for f in frames],
        "transcript": transcript,
        "instruction": instruction,
    }


def decode_caption_request(payload: object) -> tuple[str, list[FrameImage], str, str]:
    _require(isinstance(payload, dict), "caption request must be an object", payload)
    for key in ("model", "frames", "transcript", "instruction"):
        _require(key in payload, f"caption request missing {key}", payload)
    _require(isinstance(payload["frames"], list) and payload["frames"],
             "frames must be a non-empty list", payload)
    frames = [decode_frame(f) for f in payload["frames"]]
    return payload["model"], frames, payload["transcript"], payload["instruction"]


def decode_caption_response(payload: object) -> str:
    _require(isinstance(payload, dict) and isinstance(payload.get("caption"), str),
             "caption response must contain caption", payload)
    return payload["caption"]


def encode_transcribe_request(model: str, audio: bytes, sample_rate_hz: int) -> dict:
    return {
        "model": model,
        "audio_b64": base64.b64encode(audio).decode("ascii"),
        "sample_rate_hz": int(sample_rate_hz),
    }


def decode_transcribe_request(payload: object) -> tuple[str, bytes, int]:
    _require(isinstance(payload, dict), "transcribe request must be an object", payload)
    for key in ("model", "audio_b64", "sample_rate_hz"):
        _require(key in payload, f"transcribe request missing {key}", payload)
    try:
        audio = base64.b64decode(payload["audio_b64"], validate=True)
    except (binascii.Error, TypeError) as exc:
        raise ProviderProtocolError(f"invalid audio base64: {exc}", payload) from exc
    _require(isinstance(payload["sample_rate_hz"], int), "sample_rate_hz must be an integer",
             payload)
    return payload["model"], audio, payload["sample_rate_hz"]


def decode_transcribe_response(payload: object) -> str:
    _require(isinstance(payload, dict) and isinstance(payload.get("transcript"), str),
             "transcribe response must contain transcript", payload)
    return payload["transcript"]


def encode_embed_text_request(model: str, texts: list[str]) -> dict:
    return {"model": model, "texts": list(texts)}


def decode_embed_text_request(payload: object) -> tuple[str, list[str]]:
    _require(isinstance(payload, dict), "embed_text request must be an object", payload)
    for key in ("model", "texts"):
        _require(key in payload, f"embed_text request missing {key}", payload)
    texts = payload["texts"]
    _require(isinstance(texts, list) and all(isinstance(t, str) for t in texts),
             "texts must be a list of strings", payload)
    return payload["model"], texts


def _decode_vector(values: object, dim: int, payload: object) -> EmbeddingVector:
    _require(isinstance(values, list) and len(values) == dim,
             f"vector must be a list of length {dim}", payload)
    try:
        arr = np.asarray(values, dtype=np.float32)
        return EmbeddingVector(arr, dim)
    except (ValueError, TypeError) as exc:
        raise ProviderProtocolError(f"invalid vector: {exc}", payload) from exc


def decode_embed_text_response(payload: object) -> list[EmbeddingVector]:
    _require(isinstance(payload, dict), "embed_text response must be an object", payload)
    for key in ("vectors", "dim"):
        _require(key in payload, f"embed_text response missing {key}", payload)
    dim = payload["dim"]
    _require(isinstance(dim, int) and dim >= 1, "dim must be a positive integer", payload)
    vectors = payload["vectors"]
    _require(isinstance(vectors, list), "vectors must be a list", payload)
    return [_decode_vector(v, dim, payload) for v in vectors]


def encode_embed_mm_request(model: str, frames: list[FrameImage] | None,
                            text: str | None) -> dict:
    payload: dict = {"model": model}
    if frames is not None:
        payload["frames"] = [encode_frame(f) for f in frames]
    if text is not None:
        payload["text"] = text
    return payload


def decode_embed_mm_request(payload: object) -> tuple[str, list[FrameImage] | None, str | None]:
    _require(isinstance(payload, dict), "embed_mm request must be an object", payload)
    _require("model" in payload, "embed_mm request missing model", payload)
    has_frames = "frames" in payload
    has_text = "text" in payload
    _require(has_frames != has_text, "embed_mm requires exactly one of frames or text", payload)
    if has_frames:
        _require(isinstance(payload["frames"], list) and payload["frames"],
                 "frames must be a non-empty list", payload)
        return payload["model"], [decode_frame(f) for f in payload["frames"]], None
    _require(isinstance(payload["text"], str), "text must be a string", payload)
    return payload["model"], None, payload["text"]


def decode_embed_mm_response(payload: object) -> EmbeddingVector:
    _require(isinstance(payload, dict), "embed_mm response must be an object", payload)
    for key in ("vector", "dim"):
        _require(key in payload, f"embed_mm response missing {key}", payload)
    dim = payload["dim"]
    _require(isinstance(dim, int) and dim >= 1, "dim must be a positive integer", payload)
    return _decode_vector(payload["vector"], dim, payload)


def decode_capabilities_response(payload: object) -> dict:
    _require(isinstance(payload, dict), "capabilities response must be an object", payload)
    for key in ("chat", "caption", "transcribe"):
        _require(isinstance(payload.get(key), bool), f"capabilities {key} must be a bool",
                 payload)
    for key in ("d_t", "d_v"):
        _require(isinstance(payload.get(key), int), f"capabilities {key} must be an int",
                 payload)
    return {
        "chat": payload["chat"],
        "caption": payload["caption"],
        "transcribe": payload["transcribe"],
        "d_t": payload["d_t"],
        "d_v": payload["d_v"],
    }
