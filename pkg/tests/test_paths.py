"""Random-walk path extraction against the exhaustive enumeration oracle."""

import io

import numpy as np
import pytest

from pathreason import (
    ParseError,
    Path,
    WalkConfig,
    cap_paths,
    enumerate_paths,
    load_graph,
    path_from_str,
    path_to_str,
    read_path_file,
    sample_paths,
    with_inverses,
    write_path_file,
)

from engine_fixtures import random_graph


def test_path_shape_invariant():
    with pytest.raises(ValueError):
        Path(entities=(1, 2), relations=(0, 1))


def test_single_edge_enumerates_one_path():
    kg = load_graph(["a\tr\tb"])
    paths = enumerate_paths(kg, kg.entity_ids["a"], kg.entity_ids["b"], max_len=1)
    assert len(paths) == 1
    assert paths[0].entities == (kg.entity_ids["a"], kg.entity_ids["b"])


def test_chain_too_long_for_budget_is_empty():
    kg = load_graph(["a\tr\tb", "b\tr\tc"])
    assert enumerate_paths(kg, kg.entity_ids["a"], kg.entity_ids["c"], max_len=1) == []


def test_unreachable_target_yields_empty(clinical_kg):
    kg = load_graph(["a\tr\tb", "c\tr\td"])
    cfg = WalkConfig(max_len=4, walks_per_pair=100, seed=0)
    assert sample_paths(kg, kg.entity_ids["a"], kg.entity_ids["d"], cfg) == []


def test_clinical_fixture_finds_two_and_three_hop_routes(clinical_kg_aug):
    kg = clinical_kg_aug
    source = kg.entity_ids["肺静脉畸形引流"]
    target = kg.entity_ids["呼吸内科"]
    cfg = WalkConfig(max_len=3, walks_per_pair=2000, seed=0)
    found = sample_paths(kg, source, target, cfg)
    two_hop = Path(
        entities=(source, kg.entity_ids["呼吸窘迫"], target),
        relations=(kg.relation_ids["疾病相关症状"], kg.relation_ids["症状相关科室"]),
    )
    three_hop = Path(
        entities=(
            source,
            kg.entity_ids["鼓槌指"],
            kg.entity_ids["肺淋巴管肌瘤"],
            target,
        ),
        relations=(
            kg.relation_ids["疾病相关症状"],
            kg.relation_ids["症状相关症状"],
            kg.relation_ids["症状相关科室"],
        ),
    )
    assert two_hop in found
    assert three_hop in found


def test_sampled_paths_are_subset_of_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(10):
        kg = with_inverses(random_graph(rng, n_entities=12, n_edges=25))
        s, t = int(rng.integers(12)), int(rng.integers(12))
        cfg = WalkConfig(max_len=3, walks_per_pair=500, seed=3)
        sampled = sample_paths(kg, s, t, cfg)
        enumerated = set(enumerate_paths(kg, s, t, max_len=3))
        assert set(sampled) <= enumerated


def test_every_sampled_path_validates_edge_by_edge():
    rng = np.random.default_rng(11)
    kg = with_inverses(random_graph(rng, n_entities=15, n_edges=40))
    cfg = WalkConfig(max_len=4, walks_per_pair=300, seed=5)
    for s in range(5):
        for t in range(5, 10):
            for p in sample_paths(kg, s, t, cfg):
                assert p.source == s and p.target == t
                assert p.validates_against(kg)


def test_sampling_is_deterministic():
    rng = np.random.default_rng(3)
    kg = with_inverses(random_graph(rng, n_entities=10, n_edges=30))
    cfg = WalkConfig(max_len=3, walks_per_pair=200, seed=9)
    a = sample_paths(kg, 0, 5, cfg)
    b = sample_paths(kg, 0, 5, cfg)
    assert a == b


def test_walk_budget_is_monotonic():
    rng = np.random.default_rng(13)
    kg = with_inverses(random_graph(rng, n_entities=10, n_edges=30))
    small = WalkConfig(max_len=3, walks_per_pair=50, seed=2)
    large = WalkConfig(max_len=3, walks_per_pair=100, seed=2)
    assert set(sample_paths(kg, 0, 4, small)) <= set(sample_paths(kg, 0, 4, large))


def test_forbidden_direct_edge_never_traversed():
    kg = with_inverses(load_graph(["a\tr\tb", "a\ts\tc", "c\ts\tb"]))
    a, b = kg.entity_ids["a"], kg.entity_ids["b"]
    r = kg.relation_ids["r"]
    cfg = WalkConfig(max_len=3, walks_per_pair=1000, seed=0)
    for p in sample_paths(kg, a, b, cfg, forbidden=r):
        for head, rel, tail in p.hops():
            assert (head, rel, tail) != (a, r, b)
            assert (head, rel, tail) != (b, kg.inverse(r), a)
    # With no exclusion the single-hop edge shows up.
    open_cfg = WalkConfig(max_len=3, walks_per_pair=1000, seed=0, exclude_direct=False)
    assert any(len(p) == 1 for p in sample_paths(kg, a, b, open_cfg, forbidden=r))


def test_enumeration_never_visits_target_midway():
    kg = with_inverses(load_graph(["a\tr\tb", "b\tr\tc", "c\tr\tb"]))
    a, b = kg.entity_ids["a"], kg.entity_ids["b"]
    for p in enumerate_paths(kg, a, b, max_len=4):
        assert b not in p.entities[:-1]


def test_cap_keeps_shortest_paths_first():
    kg = load_graph(["a\tr\tb", "a\ts\tc", "c\ts\tb"])
    paths = enumerate_paths(kg, kg.entity_ids["a"], kg.entity_ids["b"], max_len=2)
    capped = cap_paths(paths, 1)
    assert len(capped) == 1 and len(capped[0]) == 1


def test_path_serialization_round_trip(clinical_kg_aug):
    kg = clinical_kg_aug
    s = kg.entity_ids["肺静脉畸形引流"]
    t = kg.entity_ids["呼吸内科"]
    for p in enumerate_paths(kg, s, t, max_len=3):
        assert path_from_str(path_to_str(p, kg), kg) == p


@pytest.mark.parametrize("bad", ["a", "a|r", "a|r|b|s", "a|zzz|b"])
def test_malformed_path_strings_raise(bad):
    kg = load_graph(["a\tr\tb"])
    with pytest.raises(ParseError):
        path_from_str(bad, kg)


def test_path_file_round_trip():
    rng = np.random.default_rng(1)
    kg = with_inverses(random_graph(rng, n_entities=8, n_edges=20))
    pairs = []
    for s, t in ((0, 3), (1, 5)):
        pairs.append(((s, t), enumerate_paths(kg, s, t, max_len=2)))
    buf = io.StringIO()
    write_path_file(pairs, kg, buf)
    buf.seek(0)
    assert read_path_file(buf, kg) == pairs
