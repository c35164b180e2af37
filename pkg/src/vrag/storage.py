"""On-disk index format: one directory holding the knowledge graph, chunk and
clip embeddings, the grounded corpus, and the ingestion report, with per-file
sha256 digests recorded in meta.json for corruption detection.

Layout: meta.json, graph_nodes.jsonl, graph_edges.jsonl, chunks.jsonl,
corpus.jsonl, chunk_embeddings.vec, clip_embeddings.vec,
ingestion_report.jsonl.

.vec format: 8-byte magic "VRAGVEC1", dim as u32 LE, row count as u32 LE,
then row-major float32 LE values.

Writes are atomic (temp directory then rename) and serialized by an advisory
<directory>.lock file; loads need no lock.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import struct
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .graph import ChunkEmbeddingMatrix, Entity, KnowledgeGraph, Relation, TextChunk
from .ingestion import IngestionRecord
from .vectors import VectorStore

FORMAT_VERSION = 1
VEC_MAGIC = b"VRAGVEC1"

META_FILE = "meta.json"
NODES_FILE = "graph_nodes.jsonl"
EDGES_FILE = "graph_edges.jsonl"
CHUNKS_FILE = "chunks.jsonl"
CORPUS_FILE = "corpus.jsonl"
CHUNK_VEC_FILE = "chunk_embeddings.vec"
CLIP_VEC_FILE = "clip_embeddings.vec"
REPORT_FILE = "ingestion_report.jsonl"
PAYLOAD_FILES = (NODES_FILE, EDGES_FILE, CHUNKS_FILE, CORPUS_FILE,
                 CHUNK_VEC_FILE, CLIP_VEC_FILE, REPORT_FILE)


class StorageError(Exception):
    pass


class IndexVersionError(StorageError):
    pass


class IndexIntegrityError(StorageError):
    pass


class IndexLockError(StorageError):
    pass


@dataclass(frozen=True)
class ClipRecord:
    """Corpus row: clip identity, time bounds, media location, and grounding."""

    clip_id: str
    video_id: str
    index: int
    start_s: float
    end_s: float
    clip_dir: str
    caption: str
    transcript: str

    def to_json(self) -> dict:
        return {
            "clip_id": self.clip_id, "video_id": self.video_id, "index": self.index,
            "start_s": self.start_s, "end_s": self.end_s, "clip_dir": self.clip_dir,
            "caption": self.caption, "transcript": self.transcript,
        }


@dataclass(frozen=True)
class IndexMeta:
    format_version: int
    d_t: int
    d_v: int
    config: dict
    created_at: str
    counts: dict
    videos: tuple[dict, ...]
    manifest_digest: str = ""


@dataclass
class IndexBundle:
    meta: IndexMeta
    graph: KnowledgeGraph
    chunks: tuple[TextChunk, ...]
    chunk_matrix: ChunkEmbeddingMatrix
    clip_store: VectorStore
    corpus: tuple[ClipRecord, ...]
    report: tuple[IngestionRecord, ...] = ()

    def chunk_table(self) -> dict[str, TextChunk]:
        return {c.chunk_id: c for c in self.chunks}

    def corpus_table(self) -> dict[str, ClipRecord]:
        return {c.clip_id: c for c in self.corpus}


def created_at_timestamp() -> str:
    """Build timestamp; honors SOURCE_DATE_EPOCH so repeated builds can be
    byte-identical."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = float(epoch) if epoch else time.time()
    return datetime.fromtimestamp(moment, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ")


def _dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _jsonl(records: list[dict]) -> bytes:
    return "".join(_dumps(r) + "\n" for r in records).encode("utf-8")


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    for line_no, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise IndexIntegrityError(f"{path.name}:{line_no}: bad JSON: {exc}") from exc
    return records


def encode_vec(matrix: np.ndarray) -> bytes:
    if matrix.ndim != 2:
        raise ValueError("matrix must be 2-D")
    count, dim = matrix.shape
    header = VEC_MAGIC + struct.pack("<II", dim, count)
    return header + np.ascontiguousarray(matrix, dtype="<f4").tobytes()


def decode_vec(data: bytes, name: str) -> np.ndarray:
    if len(data) < 16 or data[:8] != VEC_MAGIC:
        raise IndexIntegrityError(f"{name}: bad embedding-file header")
    dim, count = struct.unpack("<II", data[8:16])
    expected = 16 + 4 * dim * count
    if len(data) != expected:
        raise IndexIntegrityError(
            f"{name}: truncated embedding file ({len(data)} bytes, want {expected})")
    return np.frombuffer(data[16:], dtype="<f4").reshape(count, dim).astype(np.float32)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _node_record(entity: Entity) -> dict:
    return {
        "entity_key": entity.entity_key,
        "display_name": entity.display_name,
        "entity_type": entity.entity_type,
        "description": entity.description,
        "source_chunk_ids": sorted(entity.source_chunk_ids),
        "description_fragments": [list(f) for f in entity.description_fragments],
    }


def _edge_record(relation: Relation) -> dict:
    return {
        "src_key": relation.src_key,
        "dst_key": relation.dst_key,
        "description": relation.description,
        "source_chunk_ids": sorted(relation.source_chunk_ids),
        "description_fragments": [list(f) for f in relation.description_fragments],
    }


def _serialize(bundle: IndexBundle) -> dict[str, bytes]:
    graph = bundle.graph
    files = {
        NODES_FILE: _jsonl([_node_record(graph.entities[k])
                            for k in sorted(graph.entities)]),
        EDGES_FILE: _jsonl([_edge_record(graph.relations[p])
                            for p in sorted(graph.relations)]),
        CHUNKS_FILE: _jsonl([{
            "chunk_id": c.chunk_id, "clip_ids": list(c.clip_ids),
            "text": c.text, "token_count": c.token_count,
        } for c in bundle.chunks]),
        CORPUS_FILE: _jsonl([c.to_json() for c in bundle.corpus]),
        CHUNK_VEC_FILE: encode_vec(bundle.chunk_matrix.matrix),
        CLIP_VEC_FILE: encode_vec(bundle.clip_store.matrix),
        REPORT_FILE: _jsonl([r.to_json() for r in bundle.report]),
    }
    meta = {
        "format_version": bundle.meta.format_version,
        "d_t": bundle.meta.d_t,
        "d_v": bundle.meta.d_v,
        "config": bundle.meta.config,
        "created_at": bundle.meta.created_at,
        "counts": bundle.meta.counts,
        "videos": list(bundle.meta.videos),
        "manifest_digest": bundle.meta.manifest_digest,
        "digests": {name: _sha256(data) for name, data in files.items()},
    }
    files[META_FILE] = (_dumps(meta) + "\n").encode("utf-8")
    return files


class _DirectoryLock:
    def __init__(self, directory: Path) -> None:
        self.path = directory.parent / (directory.name + ".lock")

    def __enter__(self) -> "_DirectoryLock":
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise IndexLockError(
                f"{self.path} exists; another writer owns this index") from None
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.path.unlink(missing_ok=True)


def save_index(bundle: IndexBundle, directory: Path, *, overwrite: bool = False) -> None:
    """Write the full layout under a temp directory, then rename into place.
    A failed save never leaves a partial index at the target path."""
    directory = Path(directory)
    if directory.exists() and not overwrite:
        raise StorageError(f"{directory} already exists (pass overwrite to replace)")
    files = _serialize(bundle)
    with _DirectoryLock(directory):
        tmp = directory.parent / (directory.name + ".tmp")
        if tmp.exists():
            shutil.rmtree(tmp)
        tmp.mkdir(parents=True)
        try:
            for name, data in files.items():
                (tmp / name).write_bytes(data)
            if directory.exists():
                shutil.rmtree(directory)
            os.rename(tmp, directory)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise


def load_index(directory: Path) -> IndexBundle:
    """Reload a saved index, verifying digests, format version, and the
    bundle's structural invariants."""
    directory = Path(directory)
    meta_path = directory / META_FILE
    if not meta_path.exists():
        raise StorageError(f"{directory} is not an index directory (no {META_FILE})")
    try:
        meta_raw = json.loads(meta_path.read_bytes().decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise IndexIntegrityError(f"{META_FILE}: bad JSON: {exc}") from exc
    version = meta_raw.get("format_version")
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"unsupported index format_version {version!r} (supported: {FORMAT_VERSION})")

    digests = meta_raw.get("digests", {})
    for name in PAYLOAD_FILES:
        path = directory / name
        if not path.exists():
            raise IndexIntegrityError(f"{name}: missing from index directory")
        actual = _sha256(path.read_bytes())
        if digests.get(name) != actual:
            raise IndexIntegrityError(f"{name}: digest mismatch (corrupt or modified)")

    graph = KnowledgeGraph()
    for rec in _read_jsonl(directory / NODES_FILE):
        entity = Entity(
            entity_key=rec["entity_key"], display_name=rec["display_name"],
            entity_type=rec["entity_type"], description=rec["description"],
            source_chunk_ids=set(rec["source_chunk_ids"]),
            description_fragments=[tuple(f) for f in rec["description_fragments"]],
        )
        graph.entities[entity.entity_key] = entity
    for rec in _read_jsonl(directory / EDGES_FILE):
        relation = Relation(
            src_key=rec["src_key"], dst_key=rec["dst_key"],
            description=rec["description"],
            source_chunk_ids=set(rec["source_chunk_ids"]),
            description_fragments=[tuple(f) for f in rec["description_fragments"]],
        )
        graph.relations[relation.pair] = relation

    chunks = tuple(TextChunk(
        chunk_id=rec["chunk_id"], clip_ids=tuple(rec["clip_ids"]),
        text=rec["text"], token_count=rec["token_count"],
    ) for rec in _read_jsonl(directory / CHUNKS_FILE))
    corpus = tuple(ClipRecord(
        clip_id=rec["clip_id"], video_id=rec["video_id"], index=rec["index"],
        start_s=rec["start_s"], end_s=rec["end_s"], clip_dir=rec["clip_dir"],
        caption=rec["caption"], transcript=rec["transcript"],
    ) for rec in _read_jsonl(directory / CORPUS_FILE))
    report = tuple(IngestionRecord(
        clip_id=rec["clip_id"], status=rec["status"], error=rec.get("error"),
    ) for rec in _read_jsonl(directory / REPORT_FILE))

    chunk_rows = decode_vec((directory / CHUNK_VEC_FILE).read_bytes(), CHUNK_VEC_FILE)
    clip_rows = decode_vec((directory / CLIP_VEC_FILE).read_bytes(), CLIP_VEC_FILE)
    meta = IndexMeta(
        format_version=version, d_t=meta_raw["d_t"], d_v=meta_raw["d_v"],
        config=meta_raw["config"], created_at=meta_raw["created_at"],
        counts=meta_raw["counts"], videos=tuple(meta_raw["videos"]),
        manifest_digest=meta_raw.get("manifest_digest", ""),
    )
    bundle = IndexBundle(
        meta=meta, graph=graph, chunks=chunks,
        chunk_matrix=ChunkEmbeddingMatrix(tuple(c.chunk_id for c in chunks), chunk_rows),
        clip_store=VectorStore(tuple(c.clip_id for c in corpus), clip_rows),
        corpus=corpus, report=report,
    )
    violations = verify_integrity(bundle)
    if violations:
        raise IndexIntegrityError("; ".join(violations))
    return bundle


def verify_integrity(bundle: IndexBundle) -> list[str]:
    """Structural invariant check; returns a list of violations (empty =
    healthy)."""
    violations: list[str] = []
    chunk_ids = {c.chunk_id for c in bundle.chunks}
    clip_ids = {c.clip_id for c in bundle.corpus}

    for key, entity in bundle.graph.entities.items():
        if key != entity.entity_key:
            violations.append(f"entity map key {key!r} != entity_key")
        if not entity.source_chunk_ids:
            violations.append(f"entity {key!r} has no source chunks")
        for chunk_id in entity.source_chunk_ids:
            if chunk_id not in chunk_ids:
                violations.append(f"entity {key!r} references unknown chunk {chunk_id!r}")
    for pair, relation in bundle.graph.relations.items():
        for endpoint in (relation.src_key, relation.dst_key):
            if endpoint not in bundle.graph.entities:
                violations.append(
                    f"relation {pair} references missing entity {endpoint!r}")
        for chunk_id in relation.source_chunk_ids:
            if chunk_id not in chunk_ids:
                violations.append(f"relation {pair} references unknown chunk {chunk_id!r}")

    for chunk in bundle.chunks:
        for clip_id in chunk.clip_ids:
            if clip_id not in clip_ids:
                violations.append(
                    f"chunk {chunk.chunk_id!r} references unknown clip {clip_id!r}")

    if bundle.chunk_matrix.chunk_ids != tuple(c.chunk_id for c in bundle.chunks):
        violations.append("chunk embedding order does not match chunks.jsonl")
    if bundle.chunk_matrix.matrix.shape[0] != len(bundle.chunks):
        violations.append("chunk embedding row count != chunk count")
    if bundle.clip_store.item_ids != tuple(c.clip_id for c in bundle.corpus):
        violations.append("clip embedding order does not match corpus.jsonl")
    if len(bundle.chunks) and bundle.chunk_matrix.dim != bundle.meta.d_t:
        violations.append(
            f"chunk embedding dim {bundle.chunk_matrix.dim} != meta d_t {bundle.meta.d_t}")
    if len(bundle.corpus) and bundle.clip_store.dim != bundle.meta.d_v:
        violations.append(
            f"clip embedding dim {bundle.clip_store.dim} != meta d_v {bundle.meta.d_v}")
    if not np.isfinite(bundle.chunk_matrix.matrix).all():
        violations.append("chunk embeddings contain non-finite values")
    if not np.isfinite(bundle.clip_store.matrix).all():
        violations.append("clip embeddings contain non-finite values")

    expected_counts = {
        "videos": len(bundle.meta.videos),
        "clips": len(bundle.corpus),
        "chunks": len(bundle.chunks),
        "entities": len(bundle.graph.entities),
        "relations": len(bundle.graph.relations),
    }
    if bundle.meta.counts != expected_counts:
        violations.append(
            f"meta counts {bundle.meta.counts} != stored payload counts {expected_counts}")
    return violations
