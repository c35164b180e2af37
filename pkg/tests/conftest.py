"""Shared test fixtures: a synthetic pre-extracted video library and scripted
provider variants.

The library has three 95-second videos, each pre-segmented into four clips
(30/30/30/5 s) of six frames plus a wav track.  Frame and audio bytes are
derived deterministically from the clip identity, so expected mock outputs
can be computed independently inside tests.  One clip carries tagged frames
(shared-space pairing with "SCENE:chase" text) and one clip has an all-zero
silent track.
"""

from __future__ import annotations

import hashlib
import json
import re
import wave
from pathlib import Path

import pytest

from vrag.providers import (
    MockChatProvider,
    ProviderConfig,
    ProviderSuite,
    build_suite,
)
from vrag.providers.types import ChatTurn

FIXTURE_DURATION_S = 95.0
CLIP_BOUNDS = ((0.0, 30.0), (30.0, 60.0), (60.0, 90.0), (90.0, 95.0))
VIDEO_IDS = ("video01", "video02", "video03")
FRAMES_PER_CLIP = 6

TAG = "chase"
TAGGED_CLIP = ("video01", 0)
SILENT_CLIP = ("video03", 3)


def clip_pcm(video_id: str, index: int) -> bytes:
    """Deterministic 16-bit PCM payload for one clip's wav track."""
    if (video_id, index) == SILENT_CLIP:
        return b"\x00" * 1600
    return hashlib.sha256(f"{video_id}#{index}".encode("utf-8")).digest() * 50


def transcript_hex(video_id: str, index: int) -> str:
    return hashlib.sha256(clip_pcm(video_id, index)).hexdigest()[:8]


def expected_transcript(video_id: str, index: int) -> str:
    if (video_id, index) == SILENT_CLIP:
        return ""
    return f"MOCK-ASR({transcript_hex(video_id, index)})"


def frame_bytes(video_id: str, index: int, seq: int) -> bytes:
    if (video_id, index) == TAGGED_CLIP:
        return f"TAG:{TAG}".encode("utf-8")
    return f"img {video_id} c{index} f{seq}".encode("utf-8")


def write_clip(video_dir: Path, video_id: str, index: int,
               start_s: float, end_s: float) -> Path:
    clip_dir = video_dir / f"clip_{index}"
    clip_dir.mkdir(parents=True)
    span = end_s - start_s
    for seq in range(FRAMES_PER_CLIP):
        ts_ms = int((start_s + (seq + 0.5) * span / FRAMES_PER_CLIP) * 1000)
        (clip_dir / f"frame_{seq}_{ts_ms}.jpg").write_bytes(
            frame_bytes(video_id, index, seq))
    with wave.open(str(clip_dir / "audio.wav"), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(8000)
        wav.writeframes(clip_pcm(video_id, index))
    (clip_dir / "meta.json").write_text(
        json.dumps({"start_s": start_s, "end_s": end_s}))
    return clip_dir


def write_library(root: Path) -> Path:
    """Create the three-video library under root; returns the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    for video_id in VIDEO_IDS:
        video_dir = root / video_id
        for index, (start_s, end_s) in enumerate(CLIP_BOUNDS):
            write_clip(video_dir, video_id, index, start_s, end_s)
    manifest = {
        "list_name": "fixture-library",
        "videos": [
            {"video_id": video_id, "title": f"Fixture {video_id}",
             "media_path": video_id, "duration_s": FIXTURE_DURATION_S}
            for video_id in VIDEO_IDS
        ],
        "queries": [
            {"query_id": "q-chase", "text": "What happens during the chase?"},
        ],
    }
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path


@pytest.fixture()
def library(tmp_path: Path) -> Path:
    return write_library(tmp_path / "library")


@pytest.fixture()
def mock_suite() -> ProviderSuite:
    return build_suite(ProviderConfig())


def suite_with_chat(chat: object, base: ProviderSuite | None = None, *,
                    caption: object | None = None) -> ProviderSuite:
    if base is None:
        base = build_suite(ProviderConfig())
    return ProviderSuite(
        chat_provider=chat,
        caption_provider=caption if caption is not None else base.caption_provider,
        transcribe_provider=base.transcribe_provider,
        text_embed_provider=base.text_embed_provider,
        mm_embed_provider=base.mm_embed_provider,
        text_dim=base.text_dim,
        mm_dim=base.mm_dim,
    )


_ASR_MARKER = re.compile(r"MOCK-ASR\(([0-9a-f]{8})\)")


class ExtractionChat:
    """Chat provider whose extraction replies are derived from the chunk text
    itself (one speaker entity per transcript marker, all related to a shared
    Narrator), so output depends only on content, never on call order."""

    def __init__(self) -> None:
        self.config = ProviderConfig(model_name="extraction-chat")
        self._fallback = MockChatProvider(self.config)

    def chat(self, turns: list[ChatTurn], max_tokens: int = 1024) -> str:
        prompt = turns[-1].text
        if "Extract all key entities" not in prompt:
            return self._fallback.chat(turns, max_tokens)
        text = prompt.split("Text:\n", 1)[-1]
        records = ['("entity"<|>Narrator<|>person<|>the narrating voice of the library)']
        for h in dict.fromkeys(_ASR_MARKER.findall(text)):
            records.append(f'("entity"<|>Speaker {h}<|>person<|>speaks in segment {h})')
            records.append(f'("relation"<|>Narrator<|>Speaker {h}<|>share the soundtrack)')
        return "##".join(records) + "<|COMPLETE|>"


class FixtureChat:
    """ExtractionChat plus substring-keyed overrides for the other prompts."""

    def __init__(self, rules: list[tuple[tuple[str, ...], str]] | None = None) -> None:
        self.rules = rules or []
        self.config = ProviderConfig(model_name="fixture-chat")
        self._extraction = ExtractionChat()

    def chat(self, turns: list[ChatTurn], max_tokens: int = 1024) -> str:
        prompt = "\n".join(turn.text for turn in turns)
        for needles, reply in self.rules:
            if all(needle in prompt for needle in needles):
                return reply
        return self._extraction.chat(turns, max_tokens)


def winrate_reply(winner: str = "Answer 1") -> str:
    verdict = {"Winner": winner, "Explanation": "scripted"}
    obj = {d: dict(verdict) for d in ("Comprehensiveness", "Empowerment",
                                      "Trustworthiness", "Depth", "Density",
                                      "Overall")}
    return json.dumps(obj)


def quant_reply(score: float) -> str:
    verdict = {"Score": score, "Explanation": "scripted"}
    obj = {d: dict(verdict) for d in ("Comprehensiveness", "Empowerment",
                                      "Trustworthiness", "Depth", "Density",
                                      "Overall")}
    return json.dumps(obj)


def corrupt_byte(path: Path, offset: int | None = None) -> None:
    """Flip one byte of a file in place."""
    data = bytearray(path.read_bytes())
    pos = (len(data) // 2) if offset is None else offset
    data[pos] ^= 0xFF
    path.write_bytes(bytes(data))
