"""Dual-channel retrieval: entity matching, chunk selection, cross-modal
search, candidate combination, and the relevance judge."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import suite_with_chat
from vrag.graph import Entity, KnowledgeGraph, Relation, TextChunk
from vrag.ingestion import ClipDescription
from vrag.providers import FailingProvider, FrameImage, ScriptedChatProvider
from vrag.retrieval import (
    FilteredClips,
    Query,
    RetrievalSets,
    Verdict,
    build_entity_store,
    clips_from_chunks,
    combine_candidates,
    entity_text,
    filter_clips,
    llm_judge_relevance,
    match_entities,
    reformulate_query,
    scene_query,
    select_chunks,
    visual_retrieve,
)
from vrag.vectors import VectorStore


def add_entity(graph, name, description, chunk_ids, entity_type="thing"):
    key = name.casefold()
    graph.entities[key] = Entity(key, name, entity_type, description,
                                 set(chunk_ids), [(c, description) for c in chunk_ids])
    return key


def add_relation(graph, a, b, description, chunk_ids):
    pair = tuple(sorted((a, b)))
    graph.relations[pair] = Relation(pair[0], pair[1], description,
                                     set(chunk_ids), [(c, description) for c in chunk_ids])


def test_query_requires_text():
    with pytest.raises(ValueError):
        Query("q1", "   ")
    assert Query("q1", "what happened?").text == "what happened?"


def test_reformulate_and_scene_use_chat_reply(mock_suite):
    chat = ScriptedChatProvider(rules=[
        (("Rewrite the question",), "The hero crosses the bridge."),
        (("Describe the visual scene",), "A stone bridge at dusk."),
    ])
    suite = suite_with_chat(chat)
    q = Query("q1", "How does the hero cross?")
    assert reformulate_query(q, suite) == "The hero crosses the bridge."
    assert scene_query(q, suite) == "A stone bridge at dusk."
    assert any(q.text in call for call in chat.calls)


def test_reformulate_falls_back_on_failure_or_blank():
    q = Query("q1", "original question")
    assert reformulate_query(q, suite_with_chat(FailingProvider())) == "original question"
    blank = ScriptedChatProvider(default="   ")
    assert scene_query(q, suite_with_chat(blank)) == "original question"


def test_entity_text_format():
    assert entity_text("Hero", "saves the day") == "Hero: saves the day"


def test_build_entity_store_sorted_keys_and_rows(mock_suite):
    graph = KnowledgeGraph()
    add_entity(graph, "Zebra", "striped animal", ["c1"])
    add_entity(graph, "Apple", "red fruit", ["c1"])
    store = build_entity_store(graph, mock_suite)
    assert store.item_ids == ("apple", "zebra")
    expected = mock_suite.embed_text([entity_text("Apple", "red fruit")])[0]
    assert np.array_equal(store.matrix[0], expected.values)
    with pytest.raises(ValueError):
        build_entity_store(KnowledgeGraph(), mock_suite)


def test_match_entities_exact_text_ranks_first(mock_suite):
    graph = KnowledgeGraph()
    add_entity(graph, "Hero", "saves the day", ["c1"])
    add_entity(graph, "Dragon", "breathes fire", ["c2"])
    add_entity(graph, "Castle", "stone keep", ["c3"])
    # the reformulation that *is* an entity's text has cosine 1.0 with it
    matched = match_entities(entity_text("Dragon", "breathes fire"), graph,
                             mock_suite, top_e=2)
    assert matched[0] == "dragon"
    assert len(matched) == 2
    with pytest.raises(ValueError):
        match_entities("x", KnowledgeGraph(), mock_suite)
    with pytest.raises(ValueError):
        match_entities("x", graph, mock_suite, top_e=0)


def test_select_chunks_ranking_oracle():
    graph = KnowledgeGraph()
    e1 = add_entity(graph, "E1", "first", ["h1", "h2"])
    e2 = add_entity(graph, "E2", "second", ["h2", "h9"])
    add_relation(graph, e1, e2, "linked", ["h7"])
    # h2: 2 supporters; h1: rank-0 supporter; h9: rank-1 supporter;
    # h7: relation-only, no direct supporter
    assert select_chunks([e1, e2], graph) == ["h2", "h1", "h9", "h7"]
    assert select_chunks([e1, e2], graph, top_c=2) == ["h2", "h1"]
    # reversing the match order flips the h1/h9 tiebreak
    assert select_chunks([e2, e1], graph) == ["h2", "h9", "h1", "h7"]


def test_select_chunks_skips_unknown_entities_and_half_matched_relations():
    graph = KnowledgeGraph()
    e1 = add_entity(graph, "E1", "first", ["h1"])
    e2 = add_entity(graph, "E2", "second", ["h2"])
    add_relation(graph, e1, e2, "linked", ["h7"])
    # e2 not matched: its chunks and the relation's chunks stay out
    assert select_chunks([e1, "ghost"], graph) == ["h1"]
    with pytest.raises(ValueError):
        select_chunks([], graph)
    with pytest.raises(ValueError):
        select_chunks([e1], graph, top_c=0)


def test_clips_from_chunks_union_and_unknown_id():
    table = {
        "h1": TextChunk("h1", ("v#0", "v#1"), "t", 2),
        "h2": TextChunk("h2", ("v#1", "v#2"), "t", 2),
    }
    assert clips_from_chunks(["h1", "h2"], table) == {"v#0", "v#1", "v#2"}
    assert clips_from_chunks([], table) == set()
    with pytest.raises(KeyError, match="h9"):
        clips_from_chunks(["h9"], table)


def clip_store_from_tags(suite, tags):
    rows = []
    for clip_id, tag in tags.items():
        frame = FrameImage("jpeg", f"TAG:{tag}".encode(), 0.5)
        rows.append(suite.embed_multimodal(frames=[frame]).values)
    return VectorStore(tuple(tags), np.stack(rows).astype(np.float32))


def test_visual_retrieve_pairs_scene_with_tagged_clip(mock_suite):
    store = clip_store_from_tags(mock_suite, {
        "a#0": "chase", "a#1": "picnic", "b#0": "storm"})
    assert visual_retrieve("SCENE:picnic", store, mock_suite, visual_k=1) == {"a#1"}
    assert visual_retrieve("SCENE:storm", store, mock_suite, visual_k=2) >= {"b#0"}
    with pytest.raises(ValueError):
        visual_retrieve("SCENE:x", VectorStore((), np.zeros((0, 4), np.float32)),
                        mock_suite)
    with pytest.raises(ValueError):
        visual_retrieve("SCENE:x", store, mock_suite, visual_k=0)


def test_combine_candidates_modes():
    sets = RetrievalSets(textual_clips={"c", "a", "b"}, visual_clips={"b", "d"})
    assert combine_candidates(sets, "intersection") == ["b"]
    assert combine_candidates(sets, "union") == ["a", "b", "c", "d"]
    assert combine_candidates(sets, "intersection_else_union") == ["b"]
    disjoint = RetrievalSets(textual_clips={"a"}, visual_clips={"b"})
    assert combine_candidates(disjoint, "intersection_else_union") == ["a", "b"]
    assert combine_candidates(disjoint, "intersection") == []
    with pytest.raises(ValueError):
        combine_candidates(sets, "both")


DESC = ClipDescription("v#0", "a red car weaves through traffic", "tires squeal")
Q = Query("q1", "Is there a car chase?")


def test_judge_yes_and_no_verdicts():
    yes = suite_with_chat(ScriptedChatProvider(default="YES\nclearly a chase"))
    assert llm_judge_relevance(DESC, Q, yes) == Verdict(1, "YES\nclearly a chase")
    no = suite_with_chat(ScriptedChatProvider(default="no."))
    assert llm_judge_relevance(DESC, Q, no).verdict == 0


def test_judge_fails_open():
    vague = suite_with_chat(ScriptedChatProvider(default="perhaps, hard to say"))
    assert llm_judge_relevance(DESC, Q, vague) == Verdict(1, "parse-failure")
    down = suite_with_chat(FailingProvider())
    verdict = llm_judge_relevance(DESC, Q, down)
    assert verdict.verdict == 1
    assert verdict.rationale.startswith("judge-unavailable: ")


def test_judge_prompt_carries_clip_evidence():
    chat = ScriptedChatProvider(default="YES")
    llm_judge_relevance(DESC, Q, suite_with_chat(chat))
    assert DESC.caption in chat.calls[0]
    assert DESC.transcript in chat.calls[0]
    assert Q.text in chat.calls[0]


def test_filter_clips_keeps_candidate_order_and_records_all_verdicts():
    corpus = {
        "v#0": ClipDescription("v#0", "a red car", ""),
        "v#1": ClipDescription("v#1", "a blue boat", ""),
        "v#2": ClipDescription("v#2", "a red car again", ""),
    }
    chat = ScriptedChatProvider(
        rules=[(("red car",), "YES"), (("blue boat",), "NO")])
    suite = suite_with_chat(chat)
    result = filter_clips(["v#2", "v#1", "v#0"], corpus, Q, suite)
    assert result.clip_ids == ("v#2", "v#0")  # candidate order, not sorted
    assert set(result.judge_verdicts) == {"v#0", "v#1", "v#2"}
    assert result.judge_verdicts["v#1"].verdict == 0
    with pytest.raises(KeyError, match="v#9"):
        filter_clips(["v#9"], corpus, Q, suite)
    assert filter_clips([], corpus, Q, suite) == FilteredClips((), {})
