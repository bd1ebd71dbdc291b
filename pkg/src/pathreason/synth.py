"""Seeded synthetic benchmark: a planted-pattern graph for end-to-end
training and evaluation experiments.

The generator plants a single target relation that holds between a source
and a sink entity exactly when a two-hop chain ``cause_first -> bridge ->
cause_second`` connects them.  Each planted pair gets its own private
bridge entities, so corrupted entity pairs are disconnected and the only
way to score well is to read the evidence paths.  Relation-corrupted
negatives reuse connected pairs under a wrong query relation, which gives
training its rejection signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import SamplingConfig, build_instances, split_triples
from .graph import KnowledgeGraph, Triple, load_graph, subgraph_without, with_inverses
from .paths import WalkConfig
from .verbalize import RelationTemplate, Verbalizer

TARGET_RELATION = "implies"
STEP_ONE = "cause_first"
STEP_TWO = "cause_second"
NOISE_RELATIONS = tuple(f"relates_{i}" for i in range(7))

_TEMPLATES = {
    TARGET_RELATION: "{head} implies {tail}",
    STEP_ONE: "the direct cause of {tail} is {head}",
    STEP_TWO: "{head} gives rise to {tail}",
    **{name: "{head} relates to {tail}" + " indeed" * i for i, name in enumerate(NOISE_RELATIONS)},
}


@dataclass
class SynthBenchmark:
    kg: KnowledgeGraph  # base graph, facts included as edges
    facts: list[Triple]  # the target-relation triples to split and query
    target_relation: str = TARGET_RELATION
    triples_lines: list[str] = field(default_factory=list)
    meta_lines: list[str] = field(default_factory=list)
    template_lines: list[str] = field(default_factory=list)

    def verbalizer(self, kg: KnowledgeGraph | None = None) -> Verbalizer:
        """Template-bound verbalizer; pass the inverse-augmented graph when
        statements must cover paths extracted from it."""
        kg = kg or self.kg
        templates = {}
        for name, surface in _TEMPLATES.items():
            rid = kg.relation_ids.get(name)
            if rid is not None:
                templates[rid] = RelationTemplate(relation=rid, surface=surface)
        return Verbalizer(kg, templates, latin=True)


def generate_benchmark(
    seed: int = 0,
    n_entities: int = 2000,
    n_pairs: int = 480,
    second_bridge_fraction: float = 0.2,
    noise_edges_per_relation: int = 30,
) -> SynthBenchmark:
    """Deterministically generate the planted-pattern benchmark graph."""
    rng = np.random.default_rng(seed)
    n_sources = n_entities * 3 // 10
    n_sinks = n_entities * 3 // 10
    n_spare = n_entities // 20
    n_bridges = n_entities - n_sources - n_sinks - n_spare

    names = [f"E{i:04d}" for i in range(n_entities)]
    sources = names[:n_sources]
    sinks = names[n_sources : n_sources + n_sinks]
    bridges = names[n_sources + n_sinks : n_sources + n_sinks + n_bridges]
    spares = names[n_sources + n_sinks + n_bridges :]

    meta_lines = []
    for name, kind in (
        *((n, "origin") for n in sources),
        *((n, "endpoint") for n in sinks),
        *((n, "bridge") for n in bridges),
        *((n, "filler") for n in spares),
    ):
        meta_lines.append(f"{name}\t{name}\t{kind}\tnode")

    # Planted pairs: distinct (source, sink) combinations, private bridges.
    pair_keys = rng.choice(n_sources * n_sinks, size=n_pairs, replace=False)
    bridge_order = rng.permutation(n_bridges)
    next_bridge = 0
    triples: list[tuple[str, str, str]] = []
    facts: list[tuple[str, str, str]] = []
    for key in pair_keys:
        src = sources[int(key) // n_sinks]
        dst = sinks[int(key) % n_sinks]
        n_chains = 2 if rng.random() < second_bridge_fraction else 1
        for _ in range(n_chains):
            if next_bridge >= n_bridges:
                raise ValueError("not enough bridge entities for private two-hop chains")
            mid = bridges[int(bridge_order[next_bridge])]
            next_bridge += 1
            triples.append((src, STEP_ONE, mid))
            triples.append((mid, STEP_TWO, dst))
        facts.append((src, TARGET_RELATION, dst))
    triples.extend(facts)

    # Noise edges stay inside the spare pool so they never connect a
    # source to a sink.
    for rel in NOISE_RELATIONS:
        for _ in range(noise_edges_per_relation):
            a, b = rng.choice(n_spare, size=2, replace=False)
            triples.append((spares[int(a)], rel, spares[int(b)]))

    triples_lines = [f"{h}\t{r}\t{t}" for h, r, t in triples]
    template_lines = [f"{name}\t{surface}" for name, surface in _TEMPLATES.items()]
    kg = load_graph(triples_lines, meta_lines)
    fact_triples = sorted(
        Triple(kg.entity_ids[h], kg.relation_ids[r], kg.entity_ids[t])
        for h, r, t in set(facts)
    )
    return SynthBenchmark(
        kg=kg,
        facts=fact_triples,
        triples_lines=triples_lines,
        meta_lines=meta_lines,
        template_lines=template_lines,
    )


def default_walk_config(seed: int = 0) -> WalkConfig:
    return WalkConfig(max_len=3, walks_per_pair=200, seed=seed)


def default_sampling_config(seed: int = 0) -> SamplingConfig:
    return SamplingConfig(neg_per_pos_train=4.0, neg_per_pos_test=8.0, seed=seed)


def build_benchmark_dataset(
    bench: SynthBenchmark,
    walk: WalkConfig | None = None,
    sampling: SamplingConfig | None = None,
    split_seed: int = 0,
):
    """Split the planted facts and build train/dev/test instances.

    Dev and test facts are removed from the walk graph before inverse
    augmentation, so no held-out edge ever appears inside an evidence
    path.  Returns ``(train, dev, test, kg_walk)``.
    """
    walk = walk or default_walk_config()
    sampling = sampling or default_sampling_config()
    train_facts, dev_facts, test_facts = split_triples(bench.facts, split_seed)
    kg_walk = with_inverses(subgraph_without(bench.kg, dev_facts + test_facts))
    train = build_instances(
        kg_walk, train_facts, walk, sampling, kind="train", truth_kg=bench.kg
    )
    dev = build_instances(
        kg_walk, dev_facts, walk, sampling, kind="eval", truth_kg=bench.kg
    )
    test = build_instances(
        kg_walk, test_facts, walk, sampling, kind="eval", truth_kg=bench.kg
    )
    return train, dev, test, kg_walk


def write_benchmark(bench: SynthBenchmark, out_dir: str) -> None:
    import os

    os.makedirs(out_dir, exist_ok=True)
    files = {
        "triples.tsv": bench.triples_lines,
        "meta.tsv": bench.meta_lines,
        "templates.tsv": bench.template_lines,
        "targets.txt": [bench.target_relation],
    }
    for filename, lines in files.items():
        with open(os.path.join(out_dir, filename), "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
