"""Index persistence: binary embedding codec, atomic save, digest-verified
load, and structural integrity checks."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from conftest import corrupt_byte
from vrag.graph import (
    ChunkEmbeddingMatrix,
    Entity,
    KnowledgeGraph,
    Relation,
    TextChunk,
)
from vrag.ingestion import IngestionRecord
from vrag.storage import (
    CHUNK_VEC_FILE,
    CLIP_VEC_FILE,
    FORMAT_VERSION,
    META_FILE,
    PAYLOAD_FILES,
    ClipRecord,
    IndexBundle,
    IndexIntegrityError,
    IndexLockError,
    IndexMeta,
    IndexVersionError,
    StorageError,
    created_at_timestamp,
    decode_vec,
    encode_vec,
    load_index,
    save_index,
    verify_integrity,
)
from vrag.vectors import VectorStore


def small_bundle() -> IndexBundle:
    rng = np.random.default_rng(7)
    graph = KnowledgeGraph()
    graph.entities["hero"] = Entity("hero", "Hero", "person", "saves the day",
                                    {"v#h0"}, [("v#h0", "saves the day")])
    graph.entities["dragon"] = Entity("dragon", "Dragon", "creature", "fire",
                                      {"v#h0"}, [("v#h0", "fire")])
    graph.relations[("dragon", "hero")] = Relation(
        "dragon", "hero", "fights", {"v#h0"}, [("v#h0", "fights")])
    chunks = (TextChunk("v#h0", ("v#0", "v#1"), "cap one\ncap two", 4),)
    chunk_matrix = ChunkEmbeddingMatrix(
        ("v#h0",), rng.standard_normal((1, 8)).astype(np.float32))
    clip_store = VectorStore(
        ("v#0", "v#1"), rng.standard_normal((2, 4)).astype(np.float32))
    corpus = (
        ClipRecord("v#0", "v", 0, 0.0, 30.0, "media/v/clip_0", "cap one", ""),
        ClipRecord("v#1", "v", 1, 30.0, 60.0, "media/v/clip_1", "cap two", "hi"),
    )
    meta = IndexMeta(
        format_version=FORMAT_VERSION, d_t=8, d_v=4, config={"k": 5},
        created_at=created_at_timestamp(),
        counts={"videos": 1, "clips": 2, "chunks": 1, "entities": 2,
                "relations": 1},
        videos=({"video_id": "v", "duration_s": 60.0},),
        manifest_digest="abc123",
    )
    return IndexBundle(meta, graph, chunks, chunk_matrix, clip_store, corpus,
                       (IngestionRecord("v#0", "ok"), IngestionRecord("v#1", "ok")))


# --- embedding codec --------------------------------------------------------

def test_vec_codec_round_trip():
    matrix = np.arange(12, dtype=np.float32).reshape(3, 4) / 7.0
    data = encode_vec(matrix)
    assert data[:8] == b"VRAGVEC1"
    assert len(data) == 16 + 4 * 12
    assert np.array_equal(decode_vec(data, "x.vec"), matrix)
    empty = encode_vec(np.zeros((0, 4), np.float32))
    assert decode_vec(empty, "x.vec").shape == (0, 4)


def test_vec_codec_rejects_bad_data():
    with pytest.raises(ValueError):
        encode_vec(np.zeros(3, np.float32))
    with pytest.raises(IndexIntegrityError, match="x.vec.*header"):
        decode_vec(b"NOTMAGIC" + b"\x00" * 8, "x.vec")
    good = encode_vec(np.ones((2, 2), np.float32))
    with pytest.raises(IndexIntegrityError, match="x.vec.*truncated"):
        decode_vec(good[:-3], "x.vec")
    with pytest.raises(IndexIntegrityError, match="header"):
        decode_vec(b"VRAGVEC1", "x.vec")


# --- save/load --------------------------------------------------------------

def test_save_load_round_trip(tmp_path):
    bundle = small_bundle()
    target = tmp_path / "index"
    save_index(bundle, target)
    assert sorted(p.name for p in target.iterdir()) == \
        sorted((META_FILE,) + PAYLOAD_FILES)
    loaded = load_index(target)
    assert verify_integrity(loaded) == []
    assert loaded.meta == bundle.meta
    assert loaded.chunks == bundle.chunks
    assert loaded.corpus == bundle.corpus
    assert set(loaded.graph.entities) == set(bundle.graph.entities)
    for key, entity in bundle.graph.entities.items():
        assert loaded.graph.entities[key] == entity
    assert loaded.graph.relations == bundle.graph.relations
    assert np.array_equal(loaded.chunk_matrix.matrix, bundle.chunk_matrix.matrix)
    assert np.array_equal(loaded.clip_store.matrix, bundle.clip_store.matrix)
    assert loaded.report == bundle.report


def test_save_is_deterministic_given_fixed_timestamp(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    bundle = small_bundle()
    save_index(bundle, tmp_path / "a")
    save_index(bundle, tmp_path / "b")
    for name in (META_FILE,) + PAYLOAD_FILES:
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name


def test_source_date_epoch_pins_created_at(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    assert created_at_timestamp() == "2023-11-14T22:13:20Z"


def test_save_refuses_to_clobber_without_overwrite(tmp_path):
    bundle = small_bundle()
    target = tmp_path / "index"
    save_index(bundle, target)
    with pytest.raises(StorageError, match="already exists"):
        save_index(bundle, target)
    save_index(bundle, target, overwrite=True)  # explicit overwrite is fine
    assert load_index(target).meta == bundle.meta


def test_save_respects_existing_lock(tmp_path):
    target = tmp_path / "index"
    lock = tmp_path / "index.lock"
    lock.write_text("12345")
    with pytest.raises(IndexLockError, match="another writer"):
        save_index(small_bundle(), target)
    lock.unlink()
    save_index(small_bundle(), target)
    assert not lock.exists()  # released after a successful save


def test_failed_save_leaves_no_partial_index(tmp_path, monkeypatch):
    target = tmp_path / "index"
    real_write_bytes = Path.write_bytes

    def exploding_write(self, data):
        if self.name == CLIP_VEC_FILE:
            raise OSError("disk full")
        return real_write_bytes(self, data)

    monkeypatch.setattr(Path, "write_bytes", exploding_write)
    with pytest.raises(OSError, match="disk full"):
        save_index(small_bundle(), target)
    monkeypatch.undo()
    assert not target.exists()
    assert not (tmp_path / "index.tmp").exists()
    assert not (tmp_path / "index.lock").exists()
    save_index(small_bundle(), target)  # state is clean enough to retry
    assert verify_integrity(load_index(target)) == []


def test_load_rejects_non_index_directory(tmp_path):
    with pytest.raises(StorageError, match="not an index directory"):
        load_index(tmp_path)
    with pytest.raises(StorageError, match="not an index directory"):
        load_index(tmp_path / "missing")


def test_load_rejects_future_format_version(tmp_path):
    target = tmp_path / "index"
    save_index(small_bundle(), target)
    meta = json.loads((target / META_FILE).read_text())
    meta["format_version"] = FORMAT_VERSION + 1
    (target / META_FILE).write_text(json.dumps(meta))
    with pytest.raises(IndexVersionError, match="format_version"):
        load_index(target)


def test_load_names_missing_payload_file(tmp_path):
    target = tmp_path / "index"
    save_index(small_bundle(), target)
    (target / "corpus.jsonl").unlink()
    with pytest.raises(IndexIntegrityError, match="corpus.jsonl: missing"):
        load_index(target)


def test_load_detects_and_names_any_corrupt_file(tmp_path):
    pristine = tmp_path / "index"
    save_index(small_bundle(), pristine)
    for name in (META_FILE,) + PAYLOAD_FILES:
        victim = tmp_path / f"case-{name}"
        victim.mkdir()
        for src in pristine.iterdir():
            (victim / src.name).write_bytes(src.read_bytes())
        corrupt_byte(victim / name)
        with pytest.raises(IndexIntegrityError, match=name.replace(".", r"\.")):
            load_index(victim)


# --- verify_integrity -------------------------------------------------------

def test_verify_integrity_clean_bundle():
    assert verify_integrity(small_bundle()) == []


def test_verify_integrity_flags_dangling_references():
    bundle = small_bundle()
    bundle.graph.entities["hero"].source_chunk_ids.add("ghost#h9")
    assert any("unknown chunk 'ghost#h9'" in v for v in verify_integrity(bundle))

    bundle = small_bundle()
    del bundle.graph.entities["dragon"]
    violations = verify_integrity(bundle)
    assert any("missing entity 'dragon'" in v for v in violations)
    assert any("counts" in v for v in violations)  # entity count now off too

    bundle = small_bundle()
    bundle.chunks = (TextChunk("v#h0", ("v#0", "nope#5"), "t", 1),)
    assert any("unknown clip 'nope#5'" in v for v in verify_integrity(bundle))


def test_verify_integrity_flags_embedding_mismatches():
    bundle = small_bundle()
    bundle.chunk_matrix = ChunkEmbeddingMatrix(
        ("other#h0",), bundle.chunk_matrix.matrix)
    assert any("chunk embedding order" in v for v in verify_integrity(bundle))

    bundle = small_bundle()
    bundle.clip_store = VectorStore(
        ("v#1", "v#0"), bundle.clip_store.matrix)
    assert any("clip embedding order" in v for v in verify_integrity(bundle))

    bundle = small_bundle()
    bundle.chunk_matrix = ChunkEmbeddingMatrix(
        ("v#h0",), np.zeros((1, 3), np.float32))
    assert any("!= meta d_t" in v for v in verify_integrity(bundle))


def test_verify_integrity_flags_entity_without_sources():
    bundle = small_bundle()
    bundle.graph.entities["hero"].source_chunk_ids.clear()
    assert any("no source chunks" in v for v in verify_integrity(bundle))


def test_verify_integrity_flags_count_drift():
    bundle = small_bundle()
    counts = dict(bundle.meta.counts)
    counts["clips"] = 99
    bundle.meta = IndexMeta(
        bundle.meta.format_version, bundle.meta.d_t, bundle.meta.d_v,
        bundle.meta.config, bundle.meta.created_at, counts, bundle.meta.videos,
        bundle.meta.manifest_digest)
    assert any("meta counts" in v for v in verify_integrity(bundle))
