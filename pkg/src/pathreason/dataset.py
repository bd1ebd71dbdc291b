"""Train/dev/test instance construction with corruption-based negatives.

The split is a seed-deterministic 7 : 1.5 : 1.5 partition of the fact
triples.  Negatives corrupt exactly one slot of a true triple; when an
entity slot is corrupted, the replacement is drawn with configurable
probability (default 0.70) from the entities observed in that slot under
the same relation elsewhere in the graph, which makes the negatives
maximally confusable with real facts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, SamplingError
from .graph import KnowledgeGraph, Triple
from .paths import Path, WalkConfig, cap_paths, path_from_str, path_to_str, sample_paths


@dataclass
class SamplingConfig:
    same_relation_prob: float = 0.70
    neg_per_pos_train: float = 0.75
    neg_per_pos_test: float = 8.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.same_relation_prob <= 1.0:
            raise ValueError("same_relation_prob must be in [0, 1]")
        if self.neg_per_pos_train <= 0 or self.neg_per_pos_test <= 0:
            raise ValueError("negative ratios must be > 0")


@dataclass
class QueryInstance:
    """A labeled query ``relation(source, target)?`` with its evidence paths."""

    source: int
    target: int
    relation: int
    label: bool
    paths: list[Path] = field(default_factory=list)

    def sort_key(self, kg: KnowledgeGraph) -> str:
        return instance_to_line(self, kg)


def split_triples(triples, seed: int) -> tuple[list[Triple], list[Triple], list[Triple]]:
    """Seed-deterministic disjoint 70 / 15 / remainder partition."""
    ordered = sorted(set(triples))
    n = len(ordered)
    if n < 3:
        raise ValueError(f"need at least 3 triples to split, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    shuffled = [ordered[i] for i in perm]
    n_train = (7 * n) // 10
    n_dev = (3 * n) // 20
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_dev],
        shuffled[n_train + n_dev :],
    )


def _slot_pools(kg: KnowledgeGraph, relation: int) -> tuple[list[int], list[int]]:
    """Entities seen as head / tail under ``relation``, cached on the graph."""
    cache = getattr(kg, "_pool_cache", None)
    if cache is None:
        cache = {}
        kg._pool_cache = cache  # type: ignore[attr-defined]
    pools = cache.get(relation)
    if pools is None:
        heads = sorted({t.head for t in kg.triples if t.relation == relation})
        tails = sorted({t.tail for t in kg.triples if t.relation == relation})
        pools = (heads, tails)
        cache[relation] = pools
    return pools


def _candidates(kg: KnowledgeGraph, t: Triple, slot: int) -> list:
    if slot == 0:
        return [e for e in range(kg.n_entities) if e != t.head]
    if slot == 1:
        return [e for e in range(kg.n_entities) if e != t.tail]
    return [r for r in kg.base_relations() if r != t.relation]


def _any_valid_corruption(kg: KnowledgeGraph, t: Triple) -> bool:
    for slot in (0, 1, 2):
        for c in _candidates(kg, t, slot):
            candidate = (
                Triple(c, t.relation, t.tail)
                if slot == 0
                else Triple(t.head, t.relation, c)
                if slot == 1
                else Triple(t.head, c, t.tail)
            )
            if candidate not in kg.triples:
                return True
    return False


def corrupt_triple(
    t: Triple,
    kg: KnowledgeGraph,
    cfg: SamplingConfig,
    rng: np.random.Generator,
    counters: dict | None = None,
) -> Triple:
    """Corrupt exactly one uniformly chosen slot of a true triple.

    Entity replacements come from the same-relation slot pool with
    probability ``cfg.same_relation_prob`` and uniformly from all entities
    otherwise; relation replacements are uniform over non-inverse
    relations.  Resamples until the result is not a known true triple.

    ``counters`` (optional) tallies which branch produced the accepted
    triple under the keys ``entity_same``, ``entity_uniform``, ``relation``.

    Raises:
        SamplingError: when every possible single-slot corruption is a
            true triple.
    """
    if kg.n_entities < 2 or len(kg.base_relations()) < 2:
        raise SamplingError("graph too small to corrupt against")
    attempts = 0
    while True:
        slot = int(rng.integers(3))
        branch = "relation"
        if slot == 2:
            options = [r for r in kg.base_relations() if r != t.relation]
            candidate = (
                Triple(t.head, options[int(rng.integers(len(options)))], t.tail)
                if options
                else None
            )
        else:
            original = t.head if slot == 0 else t.tail
            if rng.random() < cfg.same_relation_prob:
                branch = "entity_same"
                pool = _slot_pools(kg, t.relation)[slot]
                options = [e for e in pool if e != original]
            else:
                branch = "entity_uniform"
                options = None  # uniform over all entities, drawn directly
            if options is None:
                e = int(rng.integers(kg.n_entities))
                if e == original:
                    e = None
            elif options:
                e = options[int(rng.integers(len(options)))]
            else:
                e = None
            candidate = None
            if e is not None:
                candidate = Triple(e, t.relation, t.tail) if slot == 0 else Triple(
                    t.head, t.relation, e
                )
        if candidate is not None and candidate not in kg.triples:
            if counters is not None:
                counters[branch] = counters.get(branch, 0) + 1
            return candidate
        attempts += 1
        if attempts % 1000 == 0 and not _any_valid_corruption(kg, t):
            raise SamplingError(
                f"every corruption of ({kg.entity_name(t.head)}, "
                f"{kg.relation_name(t.relation)}, {kg.entity_name(t.tail)}) "
                "is a true triple"
            )


def _negatives_for(ratio: float, rng: np.random.Generator) -> int:
    base = int(ratio)
    return base + (1 if rng.random() < ratio - base else 0)


def build_instances(
    kg_walk: KnowledgeGraph,
    triples,
    walk: WalkConfig,
    cfg: SamplingConfig,
    kind: str = "train",
    truth_kg: KnowledgeGraph | None = None,
) -> list[QueryInstance]:
    """One positive instance per split triple plus sampled negatives.

    ``kg_walk`` is the (inverse-augmented) graph paths are extracted from;
    it must not contain the split's own triples for dev/test splits.
    ``truth_kg`` supplies the full fact set negatives are screened
    against (defaults to ``kg_walk``).  Deterministic under the config
    seeds: every instance derives its own RNG from its triple.
    """
    if kind not in ("train", "eval"):
        raise ValueError("kind must be 'train' or 'eval'")
    truth = truth_kg or kg_walk
    ratio = cfg.neg_per_pos_train if kind == "train" else cfg.neg_per_pos_test
    instances: list[QueryInstance] = []
    for t in sorted(set(triples)):
        rng = np.random.default_rng(
            [cfg.seed & 0xFFFFFFFFFFFFFFFF, t.head, t.relation, t.tail]
        )
        pos_paths = cap_paths(
            sample_paths(kg_walk, t.head, t.tail, walk, forbidden=t.relation),
            walk.path_cap,
        )
        instances.append(
            QueryInstance(t.head, t.tail, t.relation, label=True, paths=pos_paths)
        )
        for _ in range(_negatives_for(ratio, rng)):
            neg = corrupt_triple(t, truth, cfg, rng)
            neg_paths = cap_paths(
                sample_paths(kg_walk, neg.head, neg.tail, walk, forbidden=neg.relation),
                walk.path_cap,
            )
            instances.append(
                QueryInstance(
                    neg.head, neg.tail, neg.relation, label=False, paths=neg_paths
                )
            )
    return instances


# -- serialization ---------------------------------------------------------


def instance_to_line(inst: QueryInstance, kg: KnowledgeGraph) -> str:
    paths = ";".join(path_to_str(p, kg) for p in inst.paths) if inst.paths else "-"
    return "\t".join(
        (
            "1" if inst.label else "0",
            kg.relation_name(inst.relation),
            kg.entity_name(inst.source),
            kg.entity_name(inst.target),
            paths,
        )
    )


def write_instances(instances, kg: KnowledgeGraph, out) -> None:
    for inst in instances:
        out.write(instance_to_line(inst, kg) + "\n")


def read_instances(lines, kg: KnowledgeGraph) -> list[QueryInstance]:
    instances = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise ParseError(
                f"expected 5 tab-separated fields, got {len(fields)}", lineno
            )
        label, rel, head, tail, paths_field = fields
        if label not in ("0", "1"):
            raise ParseError(f"label must be 0 or 1, got {label!r}", lineno)
        try:
            relation = kg.relation_ids[rel]
            source = kg.entity_ids[head]
            target = kg.entity_ids[tail]
        except KeyError as exc:
            raise ParseError(f"unknown symbol {exc.args[0]!r}", lineno) from exc
        paths = (
            []
            if paths_field == "-"
            else [path_from_str(p, kg) for p in paths_field.split(";") if p]
        )
        instances.append(QueryInstance(source, target, relation, label == "1", paths))
    return instances
