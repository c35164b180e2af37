"""Video grounding: segmentation into clips, frame sampling, transcription,
and captioning, producing the per-clip textual corpus (caption, transcript).

Media decoding is delegated: tests and offline runs use pre-extracted frame
directories; an external extractor command can populate the same layout from
a raw video file.  Layout per clip:

    <video_dir>/clip_<index>/frame_<seq>_<timestamp_ms>.jpg
    <video_dir>/clip_<index>/audio.wav          (16-bit PCM, optional)
    <video_dir>/clip_<index>/meta.json          {"start_s": ..., "end_s": ...}
"""

from __future__ import annotations

import json
import math
import re
import shlex
import subprocess
import wave
from dataclasses import dataclass
from pathlib import Path

from .concurrency import bounded_map
from .prompts import CAPTION_INSTRUCTION
from .providers import FrameImage, ProviderSuite

DEFAULT_CLIP_LEN_S = 30.0
DEFAULT_FRAME_SAMPLE_K = 5

_FRAME_NAME = re.compile(r"^frame_(\d+)_(\d+)\.(jpg|jpeg|png)$")
_CLIP_DIR = re.compile(r"^clip_(\d+)$")
_MEDIA_TYPES = {"jpg": "jpeg", "jpeg": "jpeg", "png": "png"}


@dataclass(frozen=True)
class VideoSource:
    """One video of the library; media_path points at a video file or a
    pre-extracted frame directory."""

    video_id: str
    title: str
    media_path: Path
    duration_s: float

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")


@dataclass(frozen=True)
class FrameRef:
    path: Path
    timestamp_s: float


@dataclass(frozen=True)
class Clip:
    clip_id: str
    video_id: str
    index: int
    start_s: float
    end_s: float
    frame_refs: tuple[FrameRef, ...]
    audio_path: Path | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.start_s < self.end_s:
            raise ValueError(f"bad clip bounds [{self.start_s}, {self.end_s}]")


@dataclass(frozen=True)
class ClipDescription:
    clip_id: str
    caption: str
    transcript: str


@dataclass(frozen=True)
class VideoTextCorpus:
    video_id: str
    descriptions: tuple[ClipDescription, ...]


@dataclass(frozen=True)
class IngestionRecord:
    clip_id: str
    status: str  # "ok" | "failed"
    error: str | None = None

    def to_json(self) -> dict:
        rec: dict = {"clip_id": self.clip_id, "status": self.status}
        if self.error is not None:
            rec["error"] = self.error
        return rec


class IngestionError(Exception):
    pass


def segment_video(duration_s: float, clip_len_s: float) -> list[tuple[float, float]]:
    """Tile [0, duration] into ceil(duration/clip_len) intervals; all but
    possibly the last have length clip_len_s.  Adjacent intervals share their
    boundary exactly (each start is computed, not accumulated)."""
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    if clip_len_s <= 0:
        raise ValueError("clip_len_s must be positive")
    count = math.ceil(duration_s / clip_len_s)
    bounds = []
    for i in range(count):
        start = i * clip_len_s
        if start >= duration_s:  # guard against float-rounding overcount
            break
        bounds.append((start, min((i + 1) * clip_len_s, duration_s)))
    return bounds


def sample_frames(frame_count: int, k: int) -> list[int]:
    """Midpoint-uniform sampling: floor((i + 0.5) * N / k) for i in [0, k),
    deduplicated in order.  Yields exactly min(k, N) strictly increasing
    indices in [0, N)."""
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    indices: list[int] = []
    for i in range(k):
        idx = (2 * i + 1) * frame_count // (2 * k)
        if not indices or idx != indices[-1]:
            indices.append(idx)
    return indices


def media_type_for(path: Path) -> str:
    suffix = path.suffix.lstrip(".").lower()
    if suffix not in _MEDIA_TYPES:
        raise ValueError(f"unsupported frame format: {path.name}")
    return _MEDIA_TYPES[suffix]


def read_wav(path: Path) -> tuple[bytes, int]:
    """Return (raw PCM frames, sample rate) of a wav file."""
    with wave.open(str(path), "rb") as wav:
        return wav.readframes(wav.getnframes()), wav.getframerate()


def scan_frame_refs(clip_dir: Path) -> tuple[FrameRef, ...]:
    """Frame files of one clip directory, ordered by sequence number."""
    found = []
    for frame_path in clip_dir.iterdir():
        m = _FRAME_NAME.match(frame_path.name)
        if m:
            found.append((int(m.group(1)), int(m.group(2)), frame_path))
    found.sort()
    return tuple(FrameRef(p, ms / 1000.0) for _, ms, p in found)


def discover_clips(video: VideoSource) -> list[Clip]:
    """Read the frame-directory layout under video.media_path and validate
    that clips are contiguous from index 0 and tile [0, duration]."""
    root = Path(video.media_path)
    if not root.is_dir():
        raise IngestionError(f"{video.video_id}: no frame directory at {root}")
    found: dict[int, Path] = {}
    for child in root.iterdir():
        m = _CLIP_DIR.match(child.name)
        if m and child.is_dir():
            found[int(m.group(1))] = child
    if not found:
        raise IngestionError(f"{video.video_id}: no clip_* directories in {root}")
    if sorted(found) != list(range(len(found))):
        raise IngestionError(f"{video.video_id}: clip indices not contiguous from 0")

    clips = []
    for index in range(len(found)):
        clip_dir = found[index]
        meta_path = clip_dir / "meta.json"
        try:
            meta = json.loads(meta_path.read_text())
            start_s, end_s = float(meta["start_s"]), float(meta["end_s"])
        except (OSError, ValueError, KeyError) as exc:
            raise IngestionError(f"{video.video_id}: bad {meta_path}: {exc}") from exc
        frame_refs = scan_frame_refs(clip_dir)
        if not frame_refs:
            raise IngestionError(f"{video.video_id}: clip {index} has no frames")
        audio_path = clip_dir / "audio.wav"
        clips.append(Clip(
            clip_id=f"{video.video_id}#{index}",
            video_id=video.video_id,
            index=index,
            start_s=start_s,
            end_s=end_s,
            frame_refs=frame_refs,
            audio_path=audio_path if audio_path.exists() else None,
        ))

    if clips[0].start_s != 0:
        raise IngestionError(f"{video.video_id}: first clip does not start at 0")
    if clips[-1].end_s != video.duration_s:
        raise IngestionError(f"{video.video_id}: last clip does not end at duration")
    for prev, cur in zip(clips, clips[1:]):
        if prev.end_s != cur.start_s:
            raise IngestionError(
                f"{video.video_id}: gap/overlap between clips {prev.index} and {cur.index}")
    return clips


def extract_clips(video: VideoSource, extractor_cmd: str, work_dir: Path,
                  clip_len_s: float = DEFAULT_CLIP_LEN_S) -> VideoSource:
    """Run the external extractor once per segment interval to populate the
    frame-directory layout under work_dir, returning a VideoSource that points
    at it.  The command template takes {input}, {start_s}, {end_s}, {out_dir};
    non-zero exit marks the whole extraction failed."""
    video_dir = Path(work_dir) / video.video_id
    video_dir.mkdir(parents=True, exist_ok=True)
    for index, (start_s, end_s) in enumerate(segment_video(video.duration_s, clip_len_s)):
        clip_dir = video_dir / f"clip_{index}"
        clip_dir.mkdir(exist_ok=True)
        cmd = extractor_cmd.format(
            input=str(video.media_path), start_s=start_s, end_s=end_s,
            out_dir=str(clip_dir))
        result = subprocess.run(shlex.split(cmd), capture_output=True, text=True)
        if result.returncode != 0:
            raise IngestionError(
                f"extractor failed for {video.video_id} clip {index}: "
                f"{result.stderr.strip() or result.returncode}")
        (clip_dir / "meta.json").write_text(
            json.dumps({"start_s": start_s, "end_s": end_s}))
    return VideoSource(video.video_id, video.title, video_dir, video.duration_s)


def sampled_frame_images(clip: Clip, k: int) -> list[FrameImage]:
    """Load the k midpoint-uniform sampled frames of a clip; shared by
    captioning and clip encoding so both see the same frame set."""
    indices = sample_frames(len(clip.frame_refs), k)
    images = []
    for idx in indices:
        ref = clip.frame_refs[idx]
        images.append(FrameImage(media_type_for(ref.path), ref.path.read_bytes(),
                                 ref.timestamp_s))
    return images


def ground_clip(clip: Clip, suite: ProviderSuite, *,
                k: int = DEFAULT_FRAME_SAMPLE_K,
                instruction: str = CAPTION_INSTRUCTION) -> ClipDescription:
    """Transcribe the clip's audio, then caption its sampled frames with the
    transcript as context."""
    if not clip.frame_refs:
        raise ValueError(f"{clip.clip_id}: clip has no frames")
    if clip.audio_path is not None:
        pcm, rate = read_wav(clip.audio_path)
        transcript = suite.transcribe(pcm, rate)
    else:
        transcript = ""
    frames = sampled_frame_images(clip, k)
    caption = suite.caption(frames, transcript, instruction)
    return ClipDescription(clip.clip_id, caption, transcript)


def build_corpus(video: VideoSource, suite: ProviderSuite, *,
                 clips: list[Clip] | None = None,
                 k: int = DEFAULT_FRAME_SAMPLE_K,
                 instruction: str = CAPTION_INSTRUCTION,
                 max_workers: int = 4,
                 report: list[IngestionRecord] | None = None) -> VideoTextCorpus:
    """Ground every clip of a video, tolerating per-clip failures.  Failed
    clips are recorded in the report and skipped; zero surviving clips is a
    hard error."""
    if clips is None:
        clips = discover_clips(video)

    def ground(clip: Clip) -> tuple[Clip, ClipDescription | None, str | None]:
        try:
            return clip, ground_clip(clip, suite, k=k, instruction=instruction), None
        except Exception as exc:
            return clip, None, f"{type(exc).__name__}: {exc}"

    descriptions = []
    for clip, description, error in bounded_map(ground, clips, max_workers=max_workers):
        if description is None:
            record = IngestionRecord(clip.clip_id, "failed", error)
        else:
            record = IngestionRecord(clip.clip_id, "ok")
            descriptions.append(description)
        if report is not None:
            report.append(record)
    if not descriptions:
        raise IngestionError(f"{video.video_id}: every clip failed to ground")
    return VideoTextCorpus(video.video_id, tuple(descriptions))
