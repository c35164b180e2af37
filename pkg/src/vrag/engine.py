"""End-to-end orchestration: build the hybrid index (graph + chunk embeddings
+ clip embeddings) from a library manifest, and answer queries over a loaded
index through the dual-channel retrieval and generation pipeline.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .concurrency import bounded_map
from .config import CAPABILITIES, EngineConfig
from .generation import (
    EnrichedClipDescription,
    ProvenanceRef,
    RetrievalOutput,
    assemble_context,
    extract_keywords,
    generate_answer,
    recaption_clip,
    retrieve_text_chunks,
)
from .graph import build_graph_index
from .ingestion import (
    Clip,
    ClipDescription,
    IngestionRecord,
    VideoSource,
    build_corpus,
    discover_clips,
    scan_frame_refs,
)
from .providers import ProviderError, ProviderSuite, build_suite
from .retrieval import (
    FilteredClips,
    Query,
    RetrievalSets,
    build_entity_store,
    clips_from_chunks,
    combine_candidates,
    filter_clips,
    match_entities,
    reformulate_query,
    scene_query,
    select_chunks,
    visual_retrieve,
)
from .storage import (
    FORMAT_VERSION,
    ClipRecord,
    IndexBundle,
    IndexMeta,
    created_at_timestamp,
)
from .vectors import VectorStore, encode_clips


class ManifestError(Exception):
    pass


@dataclass(frozen=True)
class LibraryManifest:
    list_name: str
    videos: tuple[VideoSource, ...]
    queries: tuple[Query, ...] = ()
    digest: str = ""


@dataclass
class QueryResult:
    query: Query
    answer: str
    sets: RetrievalSets
    filtered: FilteredClips
    output: RetrievalOutput
    context: str


def load_manifest(path: Path) -> LibraryManifest:
    """Read a library manifest: {list_name, videos:[{video_id, title,
    media_path|source_url, duration_s}], queries?:[{query_id, text}]}.
    Relative media paths resolve against the manifest's directory."""
    path = Path(path)
    try:
        raw = path.read_bytes()
        obj = json.loads(raw.decode("utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ManifestError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("videos"), list):
        raise ManifestError(f"{path}: manifest needs a videos list")

    videos = []
    seen_ids: set[str] = set()
    for rec in obj["videos"]:
        try:
            video_id = rec["video_id"]
            media = rec.get("media_path")
            if media is None:
                raise ManifestError(
                    f"{path}: video {video_id!r} has no media_path; fetch its "
                    "source_url to local media first")
            media_path = Path(media)
            if not media_path.is_absolute():
                media_path = path.parent / media_path
            videos.append(VideoSource(
                video_id=video_id, title=rec.get("title", video_id),
                media_path=media_path, duration_s=float(rec["duration_s"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"{path}: bad video record {rec!r}: {exc}") from exc
        if video_id in seen_ids:
            raise ManifestError(f"{path}: duplicate video_id {video_id!r}")
        seen_ids.add(video_id)
    if not videos:
        raise ManifestError(f"{path}: manifest has no videos")

    queries = []
    seen_q: set[str] = set()
    for rec in obj.get("queries", []):
        try:
            query = Query(rec["query_id"], rec["text"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"{path}: bad query record {rec!r}: {exc}") from exc
        if query.query_id in seen_q:
            raise ManifestError(f"{path}: duplicate query_id {query.query_id!r}")
        seen_q.add(query.query_id)
        queries.append(query)

    return LibraryManifest(
        list_name=obj.get("list_name", path.stem), videos=tuple(videos),
        queries=tuple(queries), digest=hashlib.sha256(raw).hexdigest())


def build_suite_from_config(config: EngineConfig) -> ProviderSuite:
    """One backend per distinct resolved provider config; capabilities may
    point at different endpoints (e.g. chat hosted, the rest on a sidecar)."""
    resolved = {cap: config.provider_for(cap) for cap in CAPABILITIES}
    backends: dict = {}
    for provider_config in resolved.values():
        if provider_config not in backends:
            backends[provider_config] = build_suite(
                provider_config, text_dim=config.text_dim, mm_dim=config.mm_dim)
    return ProviderSuite(
        chat_provider=backends[resolved["chat"]].chat_provider,
        caption_provider=backends[resolved["caption"]].caption_provider,
        transcribe_provider=backends[resolved["transcribe"]].transcribe_provider,
        text_embed_provider=backends[resolved["embed_text"]].text_embed_provider,
        mm_embed_provider=backends[resolved["embed_mm"]].mm_embed_provider,
        text_dim=backends[resolved["embed_text"]].text_dim,
        mm_dim=backends[resolved["embed_mm"]].mm_dim,
    )


def build_index(manifest: LibraryManifest, config: EngineConfig,
                suite: ProviderSuite | None = None) -> IndexBundle:
    """Ground every video, build the knowledge graph and both embedding
    stores, and assemble the bundle ready for save_index."""
    if suite is None:
        suite = build_suite_from_config(config)
    workers = config.provider.max_concurrency
    report: list[IngestionRecord] = []
    corpora = []
    grounded_clips: list[Clip] = []
    records: list[ClipRecord] = []
    for video in manifest.videos:
        clips = discover_clips(video)
        corpus = build_corpus(video, suite, clips=clips, k=config.k,
                              max_workers=workers, report=report)
        corpora.append(corpus)
        by_id = {d.clip_id: d for d in corpus.descriptions}
        for clip in clips:
            desc = by_id.get(clip.clip_id)
            if desc is None:
                continue  # failed clip: in the report, not the index
            grounded_clips.append(clip)
            records.append(ClipRecord(
                clip_id=clip.clip_id, video_id=clip.video_id, index=clip.index,
                start_s=clip.start_s, end_s=clip.end_s,
                clip_dir=str(clip.frame_refs[0].path.parent),
                caption=desc.caption, transcript=desc.transcript))

    graph_index = build_graph_index(
        corpora, suite, token_threshold=config.token_threshold,
        synthesis_threshold=config.synthesis_threshold, max_workers=workers)
    clip_store = encode_clips(grounded_clips, suite, k=config.k, max_workers=workers)

    meta = IndexMeta(
        format_version=FORMAT_VERSION,
        d_t=suite.text_dim, d_v=suite.mm_dim,
        config=config.snapshot(),
        created_at=created_at_timestamp(),
        counts={
            "videos": len(manifest.videos),
            "clips": len(records),
            "chunks": len(graph_index.chunks),
            "entities": len(graph_index.graph.entities),
            "relations": len(graph_index.graph.relations),
        },
        videos=tuple({"video_id": v.video_id, "title": v.title,
                      "duration_s": v.duration_s} for v in manifest.videos),
        manifest_digest=manifest.digest,
    )
    return IndexBundle(
        meta=meta, graph=graph_index.graph, chunks=graph_index.chunks,
        chunk_matrix=graph_index.chunk_matrix, clip_store=clip_store,
        corpus=tuple(records), report=tuple(report))


def _clip_from_record(record: ClipRecord, with_frames: bool) -> Clip:
    frame_refs = ()
    if with_frames:
        clip_dir = Path(record.clip_dir)
        if clip_dir.is_dir():
            frame_refs = scan_frame_refs(clip_dir)
    return Clip(
        clip_id=record.clip_id, video_id=record.video_id, index=record.index,
        start_s=record.start_s, end_s=record.end_s, frame_refs=frame_refs)


class QueryEngine:
    """Answers queries over one loaded index; retrieval state is read-only and
    the entity-description embedding store is built once on first use."""

    def __init__(self, bundle: IndexBundle, config: EngineConfig,
                 suite: ProviderSuite | None = None) -> None:
        self.bundle = bundle
        self.config = config
        self.suite = suite if suite is not None else build_suite_from_config(config)
        self._entity_store: VectorStore | None = None

    def _ensure_entity_store(self) -> VectorStore | None:
        if self._entity_store is None and self.bundle.graph.entities:
            self._entity_store = build_entity_store(self.bundle.graph, self.suite)
        return self._entity_store

    def retrieve(self, q: Query) -> tuple[RetrievalSets, FilteredClips]:
        config, suite, bundle = self.config, self.suite, self.bundle
        sets = RetrievalSets()

        if bundle.graph.entities:
            reformulated = reformulate_query(q, suite)
            sets.matched_entities = match_entities(
                reformulated, bundle.graph, suite, config.top_e,
                entity_store=self._ensure_entity_store())
            if sets.matched_entities:
                sets.selected_chunks = select_chunks(
                    sets.matched_entities, bundle.graph, config.top_c)
            sets.textual_clips = clips_from_chunks(
                sets.selected_chunks, bundle.chunk_table())

        if len(bundle.clip_store) > 0:
            scene = scene_query(q, suite)
            sets.visual_clips = visual_retrieve(
                scene, bundle.clip_store, suite, config.visual_k)

        candidates = combine_candidates(sets, config.combination_mode)
        descriptions = {
            r.clip_id: ClipDescription(r.clip_id, r.caption, r.transcript)
            for r in bundle.corpus}
        filtered = filter_clips(candidates, descriptions, q, suite,
                                max_workers=config.provider.max_concurrency)
        return sets, filtered

    def answer(self, q: Query) -> QueryResult:
        config, suite, bundle = self.config, self.suite, self.bundle
        sets, filtered = self.retrieve(q)
        corpus_table = bundle.corpus_table()

        keywords = extract_keywords(q, suite)

        def enrich(clip_id: str) -> EnrichedClipDescription:
            record = corpus_table[clip_id]
            clip = _clip_from_record(record, with_frames=True)
            if clip.frame_refs:
                try:
                    fine = recaption_clip(
                        clip, keywords, record.transcript, suite,
                        k_hat=config.k_hat, k=config.k,
                        coarse_caption=record.caption)
                except (ProviderError, OSError):
                    fine = record.caption
            else:
                fine = record.caption  # media gone: reuse the coarse caption
            return EnrichedClipDescription(clip_id, fine, record.transcript)

        enriched = tuple(bounded_map(enrich, list(filtered.clip_ids),
                                     max_workers=config.provider.max_concurrency))

        text_chunks = tuple(retrieve_text_chunks(
            q, bundle.chunk_matrix, bundle.chunk_table(), suite, config.top_h)
        ) if len(bundle.chunks) else ()

        provenance = tuple(
            [ProvenanceRef("clip", e.clip_id, corpus_table[e.clip_id].video_id,
                           corpus_table[e.clip_id].start_s,
                           corpus_table[e.clip_id].end_s) for e in enriched]
            + [ProvenanceRef("chunk", c.chunk_id, c.chunk_id.split("#", 1)[0])
               for c in text_chunks])
        output = RetrievalOutput(enriched, text_chunks, provenance)

        clips_by_id = {r.clip_id: _clip_from_record(r, with_frames=False)
                       for r in bundle.corpus}
        context = assemble_context(list(enriched), clips_by_id, list(text_chunks),
                                   config.budget_tokens)
        answer = generate_answer(q, context, suite)
        return QueryResult(q, answer, sets, filtered, output, context)
