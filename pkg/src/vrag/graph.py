"""Cross-video knowledge graph construction: chunking the clip corpus, LLM
entity/relation extraction, incremental merging with name-based unification,
description synthesis, and chunk embeddings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .concurrency import bounded_map
from .ingestion import ClipDescription, VideoTextCorpus
from .prompts import (
    COMPLETION_TAG,
    EXTRACTION_SYSTEM,
    FIELD_SEP,
    RECORD_SEP,
    extraction_prompt,
    synthesis_prompt,
)
from .providers import ChatTurn, ProviderError, ProviderSuite
from .tokens import count_tokens

DEFAULT_TOKEN_THRESHOLD = 1200
DEFAULT_SYNTHESIS_THRESHOLD = 4
PLACEHOLDER_DESCRIPTION = "(mentioned in relation)"
PLACEHOLDER_TYPE = "unknown"


@dataclass(frozen=True)
class TextChunk:
    chunk_id: str
    clip_ids: tuple[str, ...]
    text: str
    token_count: int


@dataclass
class Entity:
    entity_key: str
    display_name: str
    entity_type: str
    description: str
    source_chunk_ids: set[str] = field(default_factory=set)
    # (chunk_id, fragment) pairs in merge order; deduplicated so re-merging
    # the same extraction is a no-op.
    description_fragments: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class Relation:
    src_key: str
    dst_key: str
    description: str
    source_chunk_ids: set[str] = field(default_factory=set)
    description_fragments: list[tuple[str, str]] = field(default_factory=list)

    @property
    def pair(self) -> tuple[str, str]:
        return tuple(sorted((self.src_key, self.dst_key)))


@dataclass
class KnowledgeGraph:
    entities: dict[str, Entity] = field(default_factory=dict)
    relations: dict[tuple[str, str], Relation] = field(default_factory=dict)


@dataclass(frozen=True)
class ChunkEmbeddingMatrix:
    chunk_ids: tuple[str, ...]
    matrix: np.ndarray  # |H| x d_t

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])


@dataclass(frozen=True)
class RawEntity:
    name: str
    entity_type: str
    description: str


@dataclass(frozen=True)
class RawRelation:
    src: str
    dst: str
    description: str


@dataclass(frozen=True)
class Extraction:
    chunk_id: str
    entities: tuple[RawEntity, ...]
    relations: tuple[RawRelation, ...]
    dropped_records: int = 0


@dataclass
class GraphIndex:
    graph: KnowledgeGraph
    chunks: tuple[TextChunk, ...]
    chunk_matrix: ChunkEmbeddingMatrix
    warnings: tuple[str, ...] = ()


def normalize_entity_name(name: str) -> str:
    """Unification key: trim, collapse internal whitespace, casefold."""
    key = " ".join(name.split()).casefold()
    if not key:
        raise ValueError("entity name is empty after normalization")
    return key


def description_block(desc: ClipDescription) -> str:
    return f"{desc.caption}\n{desc.transcript}" if desc.transcript else desc.caption


def split_chunks(corpora: list[VideoTextCorpus], token_threshold: int) -> list[TextChunk]:
    """Greedy in-order packing of whole clip descriptions, per video: append
    descriptions until the chunk would exceed token_threshold.  A single
    over-threshold description becomes its own chunk; chunks never span
    videos."""
    if not corpora:
        raise ValueError("corpora must be non-empty")
    if token_threshold < 1:
        raise ValueError("token_threshold must be positive")
    chunks: list[TextChunk] = []
    for corpus in corpora:
        pending: list[ClipDescription] = []
        pending_words = 0
        chunk_index = 0

        def flush() -> None:
            nonlocal pending, pending_words, chunk_index
            if not pending:
                return
            text = "\n".join(description_block(d) for d in pending)
            chunks.append(TextChunk(
                chunk_id=f"{corpus.video_id}#h{chunk_index}",
                clip_ids=tuple(d.clip_id for d in pending),
                text=text,
                token_count=count_tokens(text),
            ))
            pending, pending_words, chunk_index = [], 0, chunk_index + 1

        for desc in corpus.descriptions:
            words = len(description_block(desc).split())
            # word counts are additive across newline joins, so this equals
            # count_tokens of the would-be chunk text
            if pending and math.ceil((pending_words + words) * 4 / 3) > token_threshold:
                flush()
            pending.append(desc)
            pending_words += words
        flush()
    return chunks


def _clean_field(raw: str) -> str:
    return raw.strip().strip('"').strip()


def parse_extraction(chunk_id: str, reply: str) -> Extraction:
    """Parse delimiter-structured records out of a chat reply; malformed
    records are dropped and counted, never fatal."""
    entities: list[RawEntity] = []
    relations: list[RawRelation] = []
    dropped = 0
    body = reply.replace(COMPLETION_TAG, "")
    for record in body.split(RECORD_SEP):
        record = record.strip()
        if not record:
            continue
        if record.startswith("(") and record.endswith(")"):
            record = record[1:-1]
        fields = [_clean_field(f) for f in record.split(FIELD_SEP)]
        kind = fields[0].casefold() if fields else ""
        if kind == "entity" and len(fields) == 4 and fields[1]:
            entities.append(RawEntity(fields[1], fields[2], fields[3]))
        elif kind == "relation" and len(fields) == 4 and fields[1] and fields[2]:
            try:
                if normalize_entity_name(fields[1]) == normalize_entity_name(fields[2]):
                    dropped += 1  # self-loop
                    continue
            except ValueError:
                dropped += 1
                continue
            relations.append(RawRelation(fields[1], fields[2], fields[3]))
        else:
            dropped += 1
    return Extraction(chunk_id, tuple(entities), tuple(relations), dropped)


def extract_entities_relations(chunk: TextChunk, suite: ProviderSuite) -> Extraction:
    if not chunk.text:
        raise ValueError("chunk.text must be non-empty")
    reply = suite.chat([
        ChatTurn("system", EXTRACTION_SYSTEM),
        ChatTurn("user", extraction_prompt(chunk.text)),
    ])
    return parse_extraction(chunk.chunk_id, reply)


def _joined(fragments: list[tuple[str, str]]) -> str:
    seen: list[str] = []
    for _, text in fragments:
        if text and text not in seen:
            seen.append(text)
    return "; ".join(seen)


def _add_fragment(fragments: list[tuple[str, str]], chunk_id: str, text: str) -> None:
    if (chunk_id, text) not in fragments:
        fragments.append((chunk_id, text))


def merge_into_graph(graph: KnowledgeGraph, extraction: Extraction) -> KnowledgeGraph:
    """Fold one chunk's extraction into the graph.  Entities unify on the
    normalized name; relations unify on the unordered endpoint pair; relations
    naming an unseen entity create a placeholder node so referential
    integrity always holds."""
    chunk_id = extraction.chunk_id

    def upsert_entity(name: str, entity_type: str, description: str) -> str:
        key = normalize_entity_name(name)
        entity = graph.entities.get(key)
        if entity is None:
            entity = Entity(key, name.strip(), entity_type, "")
            graph.entities[key] = entity
        elif entity.entity_type == PLACEHOLDER_TYPE and entity_type != PLACEHOLDER_TYPE:
            entity.entity_type = entity_type
        entity.source_chunk_ids.add(chunk_id)
        _add_fragment(entity.description_fragments, chunk_id, description)
        entity.description = _joined(entity.description_fragments)
        return key

    def ensure_endpoint(name: str) -> str:
        key = normalize_entity_name(name)
        if key not in graph.entities:
            return upsert_entity(name, PLACEHOLDER_TYPE, PLACEHOLDER_DESCRIPTION)
        graph.entities[key].source_chunk_ids.add(chunk_id)
        return key

    for raw in extraction.entities:
        upsert_entity(raw.name, raw.entity_type, raw.description)
    for raw in extraction.relations:
        src_key = ensure_endpoint(raw.src)
        dst_key = ensure_endpoint(raw.dst)
        pair = tuple(sorted((src_key, dst_key)))
        relation = graph.relations.get(pair)
        if relation is None:
            relation = Relation(src_key, dst_key, "")
            graph.relations[pair] = relation
        relation.source_chunk_ids.add(chunk_id)
        _add_fragment(relation.description_fragments, chunk_id, raw.description)
        relation.description = _joined(relation.description_fragments)
    return graph


def synthesize_description(entity: Entity, suite: ProviderSuite,
                           threshold: int = DEFAULT_SYNTHESIS_THRESHOLD) -> str:
    """Condense an entity's accumulated fragments into one description via the
    LLM once it has enough of them; below threshold (or on provider failure)
    the fragments are joined verbatim."""
    fragments = [text for _, text in entity.description_fragments]
    if len(fragments) < threshold:
        return _joined(entity.description_fragments)
    try:
        return suite.chat([ChatTurn(
            "user", synthesis_prompt(entity.display_name, fragments))])
    except ProviderError:
        return _joined(entity.description_fragments)


def embed_chunks(chunks: list[TextChunk], suite: ProviderSuite) -> ChunkEmbeddingMatrix:
    if not chunks:
        raise ValueError("chunks must be non-empty")
    vectors = suite.embed_text([c.text for c in chunks])
    matrix = np.stack([v.values for v in vectors]).astype(np.float32)
    return ChunkEmbeddingMatrix(tuple(c.chunk_id for c in chunks), matrix)


def build_graph_index(corpora: list[VideoTextCorpus], suite: ProviderSuite, *,
                      token_threshold: int = DEFAULT_TOKEN_THRESHOLD,
                      synthesis_threshold: int = DEFAULT_SYNTHESIS_THRESHOLD,
                      max_workers: int = 4) -> GraphIndex:
    """Full graph pipeline: split, extract (concurrently), merge in canonical
    chunk order, synthesize entity descriptions, embed chunks."""
    if not corpora:
        raise ValueError("corpora must be non-empty")
    chunks = split_chunks(corpora, token_threshold)
    warnings: list[str] = []

    def extract(chunk: TextChunk) -> Extraction | str:
        try:
            return extract_entities_relations(chunk, suite)
        except ProviderError as exc:
            return f"{chunk.chunk_id}: extraction call failed: {exc}"

    graph = KnowledgeGraph()
    for extraction in bounded_map(extract, chunks, max_workers=max_workers):
        if isinstance(extraction, str):
            warnings.append(extraction)
            continue
        if extraction.dropped_records:
            warnings.append(
                f"{extraction.chunk_id}: dropped {extraction.dropped_records} "
                "malformed extraction records")
        merge_into_graph(graph, extraction)
    for key in sorted(graph.entities):
        entity = graph.entities[key]
        entity.description = synthesize_description(entity, suite, synthesis_threshold)
    chunk_matrix = embed_chunks(list(chunks), suite)
    return GraphIndex(graph, tuple(chunks), chunk_matrix, tuple(warnings))
