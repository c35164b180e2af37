"""Answer-side pipeline: query keyword extraction, query-aware re-captioning
of filtered clips with a larger frame count, direct text-chunk retrieval, and
final answer generation over an assembled evidence context.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import ChunkEmbeddingMatrix, TextChunk
from .ingestion import Clip, sampled_frame_images
from .prompts import ANSWER_TEMPLATE, KEYWORD_TEMPLATE, recaption_instruction
from .providers import ChatTurn, ProviderError, ProviderSuite
from .retrieval import Query
from .tokens import count_tokens, significant_words
from .vectors import VectorStore, top_k

DEFAULT_K_HAT = 15
DEFAULT_TOP_H = 5
DEFAULT_BUDGET_TOKENS = 6000

VIDEO_SECTION_HEADER = "VIDEO EVIDENCE"
TEXT_SECTION_HEADER = "TEXT EVIDENCE"


@dataclass(frozen=True)
class KeywordSet:
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class EnrichedClipDescription:
    clip_id: str
    fine_caption: str
    transcript: str


@dataclass(frozen=True)
class ProvenanceRef:
    kind: str  # "clip" | "chunk"
    ref: str
    video_id: str
    start_s: float | None = None
    end_s: float | None = None

    def to_json(self) -> dict:
        rec: dict = {"kind": self.kind, "ref": self.ref, "video_id": self.video_id}
        if self.kind == "clip":
            rec["start_s"] = self.start_s
            rec["end_s"] = self.end_s
        return rec


@dataclass(frozen=True)
class RetrievalOutput:
    clip_descriptions: tuple[EnrichedClipDescription, ...]
    text_chunks: tuple[TextChunk, ...]
    provenance: tuple[ProvenanceRef, ...]


def extract_keywords(q: Query, suite: ProviderSuite) -> KeywordSet:
    """Comma-separated keywords from the LLM; stopword-filtered query words if
    the provider fails or returns nothing usable."""
    keywords: list[str] = []
    try:
        reply = suite.chat([ChatTurn("user", KEYWORD_TEMPLATE.format(query=q.text))])
        for part in reply.replace("\n", ",").split(","):
            part = part.strip()
            if part and part not in keywords:
                keywords.append(part)
    except ProviderError:
        pass
    if not keywords:
        keywords = significant_words(q.text)
    if not keywords:
        keywords = [q.text.strip()]
    return KeywordSet(tuple(keywords))


def recaption_clip(clip: Clip, keywords: KeywordSet, transcript: str,
                   suite: ProviderSuite, *, k_hat: int = DEFAULT_K_HAT,
                   k: int = 5, coarse_caption: str = "") -> str:
    """Second captioning pass with k_hat > k frames and the query keywords in
    the instruction; reuses the coarse caption if the provider fails."""
    if k_hat <= k:
        raise ValueError(f"k_hat must exceed k ({k_hat} <= {k})")
    frames = sampled_frame_images(clip, k_hat)
    instruction = recaption_instruction(list(keywords.keywords))
    try:
        return suite.caption(frames, transcript, instruction)
    except ProviderError:
        return coarse_caption


def retrieve_text_chunks(q: Query, chunk_matrix: ChunkEmbeddingMatrix,
                         chunk_table: dict, suite: ProviderSuite,
                         top_h: int = DEFAULT_TOP_H) -> list[TextChunk]:
    """Direct semantic match of the raw query against chunk embeddings."""
    if len(chunk_matrix.chunk_ids) == 0:
        raise ValueError("chunk matrix is empty")
    if top_h < 1:
        raise ValueError("top_h must be >= 1")
    store = VectorStore(chunk_matrix.chunk_ids, chunk_matrix.matrix)
    query_vec = suite.embed_text([q.text])[0]
    return [chunk_table[item.item_id] for item in top_k(store, query_vec, top_h)]


def format_seconds(value: float) -> str:
    return f"{int(value)}s" if float(value).is_integer() else f"{value:.2f}s"


def _clip_line(enriched: EnrichedClipDescription, clip: Clip) -> str:
    span = f"{format_seconds(clip.start_s)}–{format_seconds(clip.end_s)}"
    return f"[{clip.video_id} {span}] {enriched.fine_caption} | {enriched.transcript}"


def _render(clip_lines: list[str], chunk_blocks: list[str]) -> str:
    parts = [VIDEO_SECTION_HEADER]
    parts.extend(clip_lines)
    parts.append("")
    parts.append(TEXT_SECTION_HEADER)
    parts.extend(chunk_blocks)
    return "\n".join(parts)


def assemble_context(clip_descriptions: list[EnrichedClipDescription],
                     clips_by_id: dict[str, Clip],
                     text_chunks: list[TextChunk],
                     budget_tokens: int = DEFAULT_BUDGET_TOKENS) -> str:
    """Render the two evidence sections, dropping whole lowest-ranked items
    (chunks first, then clips) until the context fits the token budget."""
    if budget_tokens < 1:
        raise ValueError("budget_tokens must be positive")
    clip_lines = [_clip_line(e, clips_by_id[e.clip_id]) for e in clip_descriptions]
    chunk_blocks = [f"[chunk {c.chunk_id}] {c.text}" for c in text_chunks]
    while True:
        context = _render(clip_lines, chunk_blocks)
        if count_tokens(context) <= budget_tokens:
            return context
        if chunk_blocks:
            chunk_blocks.pop()
        elif clip_lines:
            clip_lines.pop()
        else:
            return context  # bare headers; nothing left to drop


def generate_answer(q: Query, context: str, suite: ProviderSuite) -> str:
    """Final answer call; provider failure here is a hard error."""
    prompt = ANSWER_TEMPLATE.format(context=context, query=q.text)
    return suite.chat([ChatTurn("user", prompt)])
