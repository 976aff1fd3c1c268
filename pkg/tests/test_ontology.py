from __future__ import annotations

import json

import pytest

from argrec.llm import MockBackend, UsageAccumulator
from argrec.ontology import (
    Chunk,
    Entity,
    MinedChunk,
    MinedEntity,
    Ontology,
    OntologyConstructionError,
    canonical_name,
    chunks_for,
    construct_ontology,
    entity_id_for,
    llm_miner,
    load_corpus,
    select_options,
)


def scripted_miner(script: dict[str, MinedChunk]):
    def mine(entities, hierarchy, chunk):
        return script.get(chunk.id, MinedChunk())

    return mine


def _chunk(chunk_id: str, doc_id: str, ordinal: int = 0, text: str = "some policy text") -> Chunk:
    return Chunk(chunk_id, doc_id, ordinal, text)


def test_canonicalisation():
    assert canonical_name("  Radiotherapy   60 Gy ") == "Radiotherapy 60 Gy"
    assert entity_id_for("Radiotherapy 60 Gy in 30 Fractions") == "radiotherapy-60-gy-in-30-fractions"


def test_empty_corpus_gives_empty_ontology():
    ontology = construct_ontology([], scripted_miner({}))
    assert not ontology.entities and not ontology.chunks
    assert not ontology.hierarchy and not ontology.provenance


def test_provenance_collects_every_mention():
    t1, t2 = _chunk("t1", "d1", 0), _chunk("t2", "d1", 1)
    script = {
        "t1": MinedChunk(entities=(MinedEntity("X"),)),
        "t2": MinedChunk(entities=(MinedEntity("X"),)),
    }
    ontology = construct_ontology([("d1", [t1, t2])], scripted_miner(script))
    assert set(ontology.provenance) == {("x", "t1"), ("x", "t2")}
    assert set(ontology.chunks) == {"t1", "t2"}


def test_hand_traced_three_chunk_construction():
    # d1/t1 introduces a category and a variant; d2/t2 mentions the variant
    # again; d2/t3 adds a second variant under the same category.
    chunks = {
        "t1": MinedChunk(
            entities=(MinedEntity("Radiotherapy"), MinedEntity("Radiotherapy 60 Gy")),
            hierarchy=(("Radiotherapy", "Radiotherapy 60 Gy"),),
        ),
        "t2": MinedChunk(entities=(MinedEntity("radiotherapy 60 gy"),)),
        "t3": MinedChunk(
            entities=(MinedEntity("Radiotherapy 40 Gy"),),
            hierarchy=(("Radiotherapy", "Radiotherapy 40 Gy"),),
        ),
    }
    ontology = construct_ontology(
        [("d1", [_chunk("t1", "d1")]), ("d2", [_chunk("t2", "d2", 0), _chunk("t3", "d2", 1)])],
        scripted_miner(chunks),
    )
    assert set(ontology.entities) == {"radiotherapy", "radiotherapy-60-gy", "radiotherapy-40-gy"}
    # case-insensitive reuse: t2's mention resolved to the existing entity
    assert ontology.entities["radiotherapy-60-gy"].name == "Radiotherapy 60 Gy"
    assert set(ontology.hierarchy) == {
        ("radiotherapy", "radiotherapy-60-gy"),
        ("radiotherapy", "radiotherapy-40-gy"),
    }
    assert set(ontology.provenance) == {
        ("radiotherapy", "t1"),
        ("radiotherapy-60-gy", "t1"),
        ("radiotherapy-60-gy", "t2"),
        ("radiotherapy-40-gy", "t3"),
    }


def test_cycle_inducing_edge_is_dropped(caplog):
    chunks = {
        "t1": MinedChunk(
            entities=(MinedEntity("A"), MinedEntity("B")),
            hierarchy=(("A", "B"), ("B", "A")),
        )
    }
    with caplog.at_level("WARNING"):
        ontology = construct_ontology([("d1", [_chunk("t1", "d1")])], scripted_miner(chunks))
    assert ontology.hierarchy == frozenset({("a", "b")})
    assert any("cycle" in record.message for record in caplog.records)


def test_miner_failure_carries_partial_progress():
    def failing(entities, hierarchy, chunk):
        if chunk.id == "t2":
            raise RuntimeError("backend down")
        return MinedChunk(entities=(MinedEntity("A"),))

    with pytest.raises(OntologyConstructionError) as err:
        construct_ontology(
            [("d1", [_chunk("t1", "d1", 0), _chunk("t2", "d1", 1)])], failing
        )
    assert "t2" in str(err.value)
    assert set(err.value.partial.entities) == {"a"}


def test_determinism_with_scripted_miner():
    chunks = {
        "t1": MinedChunk(
            entities=(MinedEntity("A"), MinedEntity("B")),
            hierarchy=(("A", "B"),),
        )
    }
    docs = [("d1", [_chunk("t1", "d1")])]
    first = construct_ontology(docs, scripted_miner(chunks))
    second = construct_ontology(docs, scripted_miner(chunks))
    assert first.to_dict() == second.to_dict()


def test_relevance_filter_skips_chunks():
    chunks = {"t1": MinedChunk(entities=(MinedEntity("A"),))}
    ontology = construct_ontology(
        [("d1", [_chunk("t1", "d1")])],
        scripted_miner(chunks),
        relevance_filter=lambda chunk: False,
    )
    assert not ontology.entities and not ontology.chunks


def _selection_fixture() -> Ontology:
    """Two categories; three leaves; one combination leaf under both."""
    entities = {
        e.id: e
        for e in (
            Entity("radiotherapy", "Radiotherapy"),
            Entity("chemotherapy", "Chemotherapy"),
            Entity("rt-60", "RT 60"),
            Entity("tmz", "TMZ"),
            Entity("rt-plus-tmz", "RT plus TMZ"),
        )
    }
    chunks = {
        f"c{i}": Chunk(f"c{i}", doc, i, "text")
        for i, doc in enumerate(["d1", "d2", "d3", "d1"])
    }
    hierarchy = frozenset(
        {
            ("radiotherapy", "rt-60"),
            ("chemotherapy", "tmz"),
            ("radiotherapy", "rt-plus-tmz"),
            ("chemotherapy", "rt-plus-tmz"),
        }
    )
    provenance = frozenset(
        {
            ("rt-60", "c0"),
            ("rt-60", "c1"),
            ("rt-60", "c2"),
            ("tmz", "c0"),
            ("tmz", "c3"),  # same document as c0: counts once
            ("rt-plus-tmz", "c0"),
            ("rt-plus-tmz", "c1"),
            ("rt-plus-tmz", "c2"),
            ("radiotherapy", "c0"),
            ("radiotherapy", "c1"),
            ("radiotherapy", "c2"),
        }
    )
    return Ontology(entities=entities, chunks=chunks, hierarchy=hierarchy, provenance=provenance)


def test_select_options_filters_and_ordering():
    ontology = _selection_fixture()
    # rt-60: leaf, 3 docs, single root ancestor -> in
    # tmz: leaf but only 1 distinct doc -> out at min_documents=3
    # rt-plus-tmz: leaf, 3 docs, but two root ancestors -> out
    # radiotherapy: 3 docs but not a leaf -> out
    selected = select_options(ontology, min_documents=3)
    assert [e.id for e in selected] == ["rt-60"]


def test_select_options_flags():
    ontology = _selection_fixture()
    with_combination = select_options(ontology, min_documents=3, single_root_ancestor=False)
    assert [e.id for e in with_combination] == ["rt-60", "rt-plus-tmz"]
    with_categories = select_options(ontology, min_documents=3, leaf_only=False)
    assert [e.id for e in with_categories] == ["radiotherapy", "rt-60"]
    lenient = select_options(ontology, min_documents=1)
    assert [e.id for e in lenient] == ["rt-60", "tmz"]


def test_select_options_empty_ontology():
    assert select_options(Ontology(), min_documents=3) == []


def test_selected_options_have_provenance():
    ontology = _selection_fixture()
    for entity in select_options(ontology, min_documents=1):
        assert chunks_for(ontology, entity)


def test_chunks_for():
    ontology = _selection_fixture()
    assert [c.id for c in chunks_for(ontology, "rt-60")] == ["c0", "c1", "c2"]
    lonely = Entity("radiotherapy", "Radiotherapy")
    assert chunks_for(_selection_fixture(), lonely)  # category has mentions here
    with pytest.raises(KeyError):
        chunks_for(ontology, "nope")


def test_chunks_for_entity_without_mentions():
    ontology = Ontology(entities={"a": Entity("a", "A")})
    assert chunks_for(ontology, "a") == []


def test_ontology_serialisation_round_trip():
    ontology = _selection_fixture()
    assert Ontology.from_dict(ontology.to_dict()).to_dict() == ontology.to_dict()


def test_ontology_invariant_checks():
    with pytest.raises(ValueError):
        Ontology(hierarchy=frozenset({("a", "b")}))
    entities = {"a": Entity("a", "A"), "b": Entity("b", "B")}
    with pytest.raises(ValueError):
        Ontology(entities=entities, hierarchy=frozenset({("a", "b"), ("b", "a")}))


def test_load_corpus(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    rows = [
        {"doc_id": "d1", "chunk_id": "c1", "ordinal": 0, "text": "alpha"},
        {"doc_id": "d2", "chunk_id": "c2", "ordinal": 0, "text": "beta"},
        {"doc_id": "d1", "chunk_id": "c3", "ordinal": 1, "text": "gamma"},
    ]
    corpus.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
    documents = load_corpus(corpus)
    assert [doc for doc, _ in documents] == ["d1", "d2"]
    assert [c.id for c in documents[0][1]] == ["c1", "c3"]


def test_load_corpus_rejects_duplicates(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    rows = [
        {"doc_id": "d1", "chunk_id": "c1", "ordinal": 0, "text": "alpha"},
        {"doc_id": "d1", "chunk_id": "c2", "ordinal": 0, "text": "beta"},
    ]
    corpus.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
    with pytest.raises(ValueError) as err:
        load_corpus(corpus)
    assert "duplicate position" in str(err.value)

    corpus.write_text(
        "\n".join(
            json.dumps(r)
            for r in [
                {"doc_id": "d1", "chunk_id": "c1", "ordinal": 0, "text": "alpha"},
                {"doc_id": "d2", "chunk_id": "c1", "ordinal": 0, "text": "beta"},
            ]
        ),
        encoding="utf-8",
    )
    with pytest.raises(ValueError) as err:
        load_corpus(corpus)
    assert "duplicate chunk id" in str(err.value)


def test_ontology_rejects_position_collisions():
    with pytest.raises(ValueError):
        Ontology(
            chunks={
                "c1": Chunk("c1", "d1", 0, "alpha"),
                "c2": Chunk("c2", "d1", 0, "beta"),
            }
        )


def test_llm_miner_parses_structured_reply():
    backend = MockBackend(
        stages={
            "ontology": [
                {
                    "json": {
                        "entities": [{"name": "Radiotherapy", "description": "beam therapy"}],
                        "hierarchy": [],
                    },
                    "prompt_tokens": 10,
                    "completion_tokens": 5,
                }
            ]
        }
    )
    usage = UsageAccumulator()
    miner = llm_miner(backend, usage)
    mined = miner({}, frozenset(), _chunk("t1", "d1"))
    assert mined.entities == (MinedEntity("Radiotherapy", "beam therapy"),)
    assert usage.report()["total"]["prompt_tokens"] == 10
