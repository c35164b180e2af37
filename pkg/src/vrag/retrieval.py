"""Dual-channel retrieval: graph-mediated textual matching, cross-modal visual
matching, candidate combination, and LLM relevance filtering of clips.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .concurrency import bounded_map
from .graph import KnowledgeGraph
from .ingestion import ClipDescription
from .prompts import (
    JUDGE_RELEVANCE_TEMPLATE,
    REFORMULATE_TEMPLATE,
    SCENE_QUERY_TEMPLATE,
)
from .providers import ChatTurn, ProviderError, ProviderSuite
from .vectors import VectorStore, top_k

DEFAULT_TOP_E = 20
DEFAULT_TOP_C = 10
DEFAULT_VISUAL_K = 10
COMBINATION_MODES = ("intersection", "union", "intersection_else_union")
DEFAULT_COMBINATION_MODE = "intersection_else_union"


@dataclass(frozen=True)
class Query:
    query_id: str
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("query text must be non-empty")


@dataclass
class RetrievalSets:
    textual_clips: set[str] = field(default_factory=set)
    visual_clips: set[str] = field(default_factory=set)
    matched_entities: list[str] = field(default_factory=list)
    selected_chunks: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Verdict:
    verdict: int  # 0 | 1
    rationale: str


@dataclass(frozen=True)
class FilteredClips:
    clip_ids: tuple[str, ...]
    judge_verdicts: dict[str, Verdict]


def _chat_or(suite: ProviderSuite, prompt: str, fallback: str) -> str:
    try:
        reply = suite.chat([ChatTurn("user", prompt)]).strip()
    except ProviderError:
        return fallback
    return reply or fallback


def reformulate_query(q: Query, suite: ProviderSuite) -> str:
    """Restate the question as a declarative sentence; the original text is
    used verbatim if the provider fails."""
    return _chat_or(suite, REFORMULATE_TEMPLATE.format(query=q.text), q.text)


def scene_query(q: Query, suite: ProviderSuite) -> str:
    """Describe the visual scene the question implies, for cross-modal
    matching; falls back to the original text."""
    return _chat_or(suite, SCENE_QUERY_TEMPLATE.format(query=q.text), q.text)


def entity_text(display_name: str, description: str) -> str:
    return f"{display_name}: {description}"


def build_entity_store(graph: KnowledgeGraph, suite: ProviderSuite) -> VectorStore:
    """Embed every entity's "name: description" text, keyed by entity_key in
    sorted order."""
    if not graph.entities:
        raise ValueError("graph has no entities")
    keys = sorted(graph.entities)
    texts = [entity_text(graph.entities[k].display_name, graph.entities[k].description)
             for k in keys]
    vectors = suite.embed_text(texts)
    matrix = np.stack([v.values for v in vectors]).astype(np.float32)
    return VectorStore(tuple(keys), matrix)


def match_entities(reformulated: str, graph: KnowledgeGraph, suite: ProviderSuite,
                   top_e: int = DEFAULT_TOP_E, *,
                   entity_store: VectorStore | None = None) -> list[str]:
    """Top-e entity keys by cosine similarity between the reformulated query
    and entity descriptions; ties break on ascending key."""
    if not graph.entities:
        raise ValueError("graph has no entities")
    if top_e < 1:
        raise ValueError("top_e must be >= 1")
    store = entity_store if entity_store is not None else build_entity_store(graph, suite)
    query_vec = suite.embed_text([reformulated])[0]
    return [item.item_id for item in top_k(store, query_vec, top_e)]


def select_chunks(matched: list[str], graph: KnowledgeGraph,
                  top_c: int = DEFAULT_TOP_C) -> list[str]:
    """Chunks backing the matched subgraph, ranked by (# distinct matched
    entities sourcing the chunk desc, best matched-entity rank asc, chunk_id
    asc)."""
    if not matched:
        raise ValueError("matched entities must be non-empty")
    if top_c < 1:
        raise ValueError("top_c must be >= 1")
    rank_of = {key: i for i, key in enumerate(matched)}
    support: dict[str, set[str]] = {}
    for key in matched:
        entity = graph.entities.get(key)
        if entity is None:
            continue
        for chunk_id in entity.source_chunk_ids:
            support.setdefault(chunk_id, set()).add(key)
    candidates = set(support)
    for pair, relation in graph.relations.items():
        if pair[0] in rank_of and pair[1] in rank_of:
            candidates.update(relation.source_chunk_ids)
    default_rank = len(matched)

    def sort_key(chunk_id: str) -> tuple:
        sources = support.get(chunk_id, set())
        best = min((rank_of[k] for k in sources), default=default_rank)
        return (-len(sources), best, chunk_id)

    return sorted(candidates, key=sort_key)[:top_c]


def clips_from_chunks(chunk_ids: list[str], chunk_table: dict) -> set[str]:
    """Union of the clips packed into the given chunks."""
    clips: set[str] = set()
    for chunk_id in chunk_ids:
        if chunk_id not in chunk_table:
            raise KeyError(f"unknown chunk id {chunk_id!r}")
        clips.update(chunk_table[chunk_id].clip_ids)
    return clips


def visual_retrieve(scene: str, clip_store: VectorStore, suite: ProviderSuite,
                    visual_k: int = DEFAULT_VISUAL_K) -> set[str]:
    """Cross-modal search: embed the scene text into the shared space and take
    the top-K clips."""
    if len(clip_store) == 0:
        raise ValueError("clip store is empty")
    if visual_k < 1:
        raise ValueError("visual_k must be >= 1")
    query_vec = suite.embed_multimodal(text=scene)
    return {item.item_id for item in top_k(clip_store, query_vec, visual_k)}


def combine_candidates(sets: RetrievalSets, mode: str = DEFAULT_COMBINATION_MODE) -> list[str]:
    """Combine the two channels into an ordered candidate list (sorted by
    clip_id).  intersection_else_union falls back to the union only when the
    intersection is empty."""
    if mode not in COMBINATION_MODES:
        raise ValueError(f"unknown combination mode {mode!r}")
    intersection = sets.textual_clips & sets.visual_clips
    union = sets.textual_clips | sets.visual_clips
    if mode == "intersection":
        chosen = intersection
    elif mode == "union":
        chosen = union
    else:
        chosen = intersection if intersection else union
    return sorted(chosen)


def llm_judge_relevance(description: ClipDescription, q: Query,
                        suite: ProviderSuite) -> Verdict:
    """Binary relevance verdict for one clip.  Fails open: an unparseable
    reply or an unavailable judge keeps the clip."""
    prompt = JUDGE_RELEVANCE_TEMPLATE.format(
        query=q.text, caption=description.caption, transcript=description.transcript)
    try:
        reply = suite.chat([ChatTurn("user", prompt)])
    except ProviderError as exc:
        return Verdict(1, f"judge-unavailable: {exc}")
    leading = reply.strip().upper()
    if leading.startswith("YES"):
        return Verdict(1, reply.strip())
    if leading.startswith("NO"):
        return Verdict(0, reply.strip())
    return Verdict(1, "parse-failure")


def filter_clips(candidates: list[str], corpus: dict[str, ClipDescription],
                 q: Query, suite: ProviderSuite, *,
                 max_workers: int = 4) -> FilteredClips:
    """Keep exactly the candidates the judge accepts, in candidate order, with
    every verdict recorded."""
    for clip_id in candidates:
        if clip_id not in corpus:
            raise KeyError(f"no description for candidate clip {clip_id!r}")

    def judge(clip_id: str) -> tuple[str, Verdict]:
        return clip_id, llm_judge_relevance(corpus[clip_id], q, suite)

    verdicts = dict(bounded_map(judge, candidates, max_workers=max_workers))
    kept = tuple(c for c in candidates if verdicts[c].verdict == 1)
    return FilteredClips(kept, verdicts)
