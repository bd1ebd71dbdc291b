"""Graph loading, interning, inverse augmentation, and statistics."""

import io

import pytest
from hypothesis import given, strategies as st

from pathreason import (
    ParseError,
    Triple,
    enumerate_paths,
    graph_stats,
    load_graph,
    subgraph_without,
    with_inverses,
    write_stats,
)

from engine_fixtures import CLINICAL_META, CLINICAL_TRIPLES


def test_load_interns_entities_and_relations(clinical_kg):
    assert clinical_kg.n_entities == 8
    assert len(clinical_kg.base_relations()) == 4
    assert len(clinical_kg.triples) == 9


def test_interning_round_trip(clinical_kg):
    for name, eid in clinical_kg.entity_ids.items():
        assert clinical_kg.entity_name(eid) == name
    for name, rid in clinical_kg.relation_ids.items():
        assert clinical_kg.relation_name(rid) == name


names = st.text(
    alphabet=st.characters(blacklist_characters="\t\n", min_codepoint=33),
    min_size=1,
    max_size=8,
)


@given(st.lists(st.tuples(names, names, names), min_size=1, max_size=30))
def test_interning_round_trip_random(raw_triples):
    lines = [f"{h}\t{r}\t{t}" for h, r, t in raw_triples]
    kg = load_graph(lines)
    for name, eid in kg.entity_ids.items():
        assert kg.entity_name(eid) == name
    for name, rid in kg.relation_ids.items():
        assert kg.relation_name(rid) == name
    # Adjacency completeness: every stored triple is reachable from its head
    # and no lookup yields an edge that was not stored.
    for t in kg.triples:
        assert (t.relation, t.tail) in kg.out_edges(t.head)
    for head, edges in kg.adjacency.items():
        for rel, tail in edges:
            assert Triple(head, rel, tail) in kg.triples


def test_duplicate_triples_collapse_with_counter():
    kg = load_graph(["a\tr\tb", "a\tr\tb", "a\tr\tc"])
    assert len(kg.triples) == 2
    assert kg.duplicate_count == 1


@pytest.mark.parametrize(
    "bad_line",
    ["a\tb", "a\tb\tc\td", "\tr\tb", "a\t\tb", "a\tr\t"],
)
def test_malformed_triple_line_raises(bad_line):
    with pytest.raises(ParseError):
        load_graph(["a\tr\tb", bad_line])


def test_parse_error_names_line_number():
    with pytest.raises(ParseError, match="line 2"):
        load_graph(["a\tr\tb", "broken"])


def test_metadata_parsing_dedupes_types_and_keeps_order():
    kg = load_graph(["a\tr\tb"], ["a\tAlpha\tx, y, x,z\tcat"])
    meta = kg.meta(kg.entity_ids["a"])
    assert meta.name == "Alpha"
    assert meta.types == ["x", "y", "z"]
    assert meta.category == "cat"


def test_metadata_category_optional():
    kg = load_graph(["a\tr\tb"], ["a\tAlpha\tx"])
    assert kg.meta(kg.entity_ids["a"]).category is None


def test_entity_without_metadata_gets_empty_types(clinical_kg):
    kg = load_graph(["a\tr\tb"])
    meta = kg.meta(kg.entity_ids["a"])
    assert meta.types == [] and meta.name == "a"


def test_inverse_adds_reversed_edge():
    kg = with_inverses(load_graph(["a\tr\tb"]))
    a, b = kg.entity_ids["a"], kg.entity_ids["b"]
    inv = kg.relation_ids["inv:r"]
    assert (inv, a) in kg.out_edges(b)


def test_inverse_doubles_relation_count(clinical_kg):
    aug = with_inverses(clinical_kg)
    assert len(aug.relation_names) == 2 * len(clinical_kg.relation_names)
    assert len(aug.base_relations()) == len(clinical_kg.relation_names)


def test_inverse_preserves_triples_and_is_idempotent(clinical_kg):
    aug = with_inverses(clinical_kg)
    assert aug.triples == clinical_kg.triples
    assert with_inverses(aug) is aug


def test_inverse_pairing_is_symmetric(clinical_kg):
    aug = with_inverses(clinical_kg)
    for rid in aug.base_relations():
        inv = aug.inverse(rid)
        assert aug.is_inverse(inv) and not aug.is_inverse(rid)
        assert aug.inverse(inv) == rid


def test_subgraph_without_removes_edges_but_keeps_ids(clinical_kg):
    t = sorted(clinical_kg.triples)[0]
    sub = subgraph_without(clinical_kg, [t])
    assert t not in sub.triples
    assert len(sub.triples) == len(clinical_kg.triples) - 1
    assert sub.entity_ids == clinical_kg.entity_ids
    assert sub.relation_ids == clinical_kg.relation_ids


def test_subgraph_without_rejects_augmented_graph(clinical_kg):
    with pytest.raises(ValueError):
        subgraph_without(with_inverses(clinical_kg), [])


def test_stats_empty_graph_all_zero():
    stats = graph_stats(load_graph([]))
    assert stats.triple_count == 0
    assert stats.entity_count == 0
    assert stats.max_path_length == 0


def test_stats_path_lengths_match_enumeration():
    # Ten-triple chain fan-out; the oracle is a direct hand enumeration of
    # the path corpus lengths.
    lines = [
        "a\tr\tb", "b\tr\tc", "c\tr\td", "a\tr\tc", "b\ts\td",
        "d\ts\te", "e\tr\tf", "c\ts\tf", "a\ts\te", "f\ts\tg",
    ]
    kg = load_graph(lines)
    aug = with_inverses(kg)
    paths = enumerate_paths(aug, kg.entity_ids["a"], kg.entity_ids["d"], max_len=3)
    lengths = [len(p) for p in paths]
    stats = graph_stats(kg, paths)
    assert stats.path_count == len(lengths)
    assert stats.avg_path_length == pytest.approx(sum(lengths) / len(lengths))
    assert stats.max_path_length == max(lengths)


def test_stats_grouped_paths_compute_per_query_average():
    kg = load_graph(["a\tr\tb", "b\ts\tc"])
    aug = with_inverses(kg)
    a, c = kg.entity_ids["a"], kg.entity_ids["c"]
    per_query = {
        kg.relation_ids["r"]: enumerate_paths(aug, a, c, max_len=2),
        kg.relation_ids["s"]: [],
    }
    stats = graph_stats(kg, per_query)
    assert stats.avg_paths_per_query_relation == pytest.approx(
        stats.path_count / 2
    )


def test_stats_emit_key_value_lines(clinical_kg):
    buf = io.StringIO()
    write_stats(graph_stats(clinical_kg), buf)
    lines = buf.getvalue().splitlines()
    assert "# Triples\t9" in lines
    assert "# Relation types\t4" in lines
    assert "# Entities\t8" in lines
