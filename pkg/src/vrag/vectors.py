"""Clip embedding store and exact cosine top-K search.

Search is brute force on purpose: library-scale corpora scan in milliseconds,
results are exact, and an independent linear-scan oracle can check them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .concurrency import bounded_map
from .ingestion import Clip, sampled_frame_images
from .providers import EmbeddingVector, ProviderSuite


@dataclass(frozen=True)
class VectorStore:
    item_ids: tuple[str, ...]
    matrix: np.ndarray  # |items| x dim, float32

    def __post_init__(self) -> None:
        if len(self.item_ids) != len(set(self.item_ids)):
            raise ValueError("item_ids must be unique")
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.item_ids):
            raise ValueError("matrix row count must equal item_id count")
        if not np.isfinite(self.matrix).all():
            raise ValueError("matrix must be finite")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return len(self.item_ids)


@dataclass(frozen=True)
class ScoredItem:
    item_id: str
    score: float


def encode_clips(clips: list[Clip], suite: ProviderSuite, *, k: int = 5,
                 max_workers: int = 4) -> VectorStore:
    """One multimodal embedding per clip over the same k sampled frames the
    captioner saw."""
    if not clips:
        raise ValueError("clips must be non-empty")
    for clip in clips:
        if not clip.frame_refs:
            raise ValueError(f"{clip.clip_id}: clip has no frames")

    def encode(clip: Clip) -> EmbeddingVector:
        return suite.embed_multimodal(frames=sampled_frame_images(clip, k))

    vectors = bounded_map(encode, clips, max_workers=max_workers)
    matrix = np.stack([v.values for v in vectors]).astype(np.float32)
    return VectorStore(tuple(c.clip_id for c in clips), matrix)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dim != b.dim:
        raise ValueError(f"dim mismatch: {a.dim} vs {b.dim}")
    norm_a = float(np.linalg.norm(a.values))
    norm_b = float(np.linalg.norm(b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine is undefined for zero vectors")
    return float(np.dot(a.values, b.values)) / (norm_a * norm_b)


def top_k(store: VectorStore, query: EmbeddingVector, k: int) -> list[ScoredItem]:
    """Exact top-k by cosine score, descending; ties broken by ascending
    item_id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if query.dim != store.dim:
        raise ValueError(f"query dim {query.dim} != store dim {store.dim}")
    q = query.values.astype(np.float64)
    q_norm = float(np.linalg.norm(q))
    if q_norm == 0.0:
        raise ValueError("cosine is undefined for zero vectors")
    rows = store.matrix.astype(np.float64)
    row_norms = np.linalg.norm(rows, axis=1)
    if np.any(row_norms == 0.0):
        raise ValueError("store contains a zero vector")
    scores = rows @ q / (row_norms * q_norm)
    order = sorted(range(len(store)), key=lambda i: (-scores[i], store.item_ids[i]))
    return [ScoredItem(store.item_ids[i], float(scores[i])) for i in order[:k]]
