"""Relation-path extraction by seeded random walks, with an exhaustive
depth-bounded enumeration used as the testing oracle.

A path is the alternating sequence ``e0, r1, e1, ..., rL, eL`` of entity
and relation ids.  Walks step uniformly over the outgoing edges of the
(inverse-augmented) graph and harvest a path the first time they touch the
target within the hop budget; entity revisits are allowed, but the target
only ever appears as the final entity.  Sampling for a pair is a pure
function of ``(graph, source, target, config)``: the walk RNG is derived
from ``(seed, source, target)``, so distinct pairs can run in parallel
without affecting results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import ParseError
from .graph import KnowledgeGraph


@dataclass(frozen=True, order=True)
class Path:
    """Alternating entity/relation sequence from a source to a target."""

    entities: tuple[int, ...]
    relations: tuple[int, ...]

    def __post_init__(self):
        if len(self.entities) != len(self.relations) + 1:
            raise ValueError("path needs exactly one more entity than relations")

    @property
    def source(self) -> int:
        return self.entities[0]

    @property
    def target(self) -> int:
        return self.entities[-1]

    def __len__(self) -> int:
        return len(self.relations)

    def hops(self) -> Iterable[tuple[int, int, int]]:
        for i, r in enumerate(self.relations):
            yield self.entities[i], r, self.entities[i + 1]

    def validates_against(self, kg: KnowledgeGraph) -> bool:
        return all(kg.has_edge(h, r, t) for h, r, t in self.hops())


@dataclass
class WalkConfig:
    max_len: int = 7
    walks_per_pair: int = 1000
    seed: int = 0
    dedupe: bool = True
    exclude_direct: bool = True
    path_cap: int = 200

    def __post_init__(self):
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.walks_per_pair < 1:
            raise ValueError("walks_per_pair must be >= 1")


def _forbidden_edges(
    kg: KnowledgeGraph, source: int, target: int, forbidden: Optional[int]
) -> frozenset[tuple[int, int, int]]:
    """Direct edges excluded from traversal for a query relation.

    Excluding the direct edge (and its inverse) everywhere prevents label
    leakage through the very fact an instance is asking about.
    """
    if forbidden is None:
        return frozenset()
    edges = {(source, forbidden, target)}
    if forbidden in kg.inverse_of:
        inv = kg.inverse_of[forbidden]
        edges.add((target, inv, source))
        edges.add((source, inv, target))
        edges.add((target, forbidden, source))
    return frozenset(edges)


def sample_paths(
    kg: KnowledgeGraph,
    source: int,
    target: int,
    cfg: WalkConfig,
    forbidden: Optional[int] = None,
) -> list[Path]:
    """Random-walk path extraction between one entity pair.

    Returns the deduplicated paths found by ``cfg.walks_per_pair`` uniform
    walks of at most ``cfg.max_len`` hops, sorted by (length, ids).  When
    ``cfg.exclude_direct`` is set and ``forbidden`` names the query
    relation, the single edge ``(source, forbidden, target)`` and its
    inverse are never traversed.  An empty list is a valid result.
    """
    banned = (
        _forbidden_edges(kg, source, target, forbidden)
        if cfg.exclude_direct
        else frozenset()
    )
    rng = np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, source, target])
    found: list[Path] = []
    for _ in range(cfg.walks_per_pair):
        cur = source
        ents = [source]
        rels: list[int] = []
        for _ in range(cfg.max_len):
            edges = kg.out_edges(cur)
            if banned:
                edges = [e for e in edges if (cur, e[0], e[1]) not in banned]
            if not edges:
                break
            rel, nxt = edges[int(rng.integers(len(edges)))]
            ents.append(nxt)
            rels.append(rel)
            cur = nxt
            if cur == target:
                found.append(Path(tuple(ents), tuple(rels)))
                break
    if cfg.dedupe:
        found = list(set(found))
    return sorted(found, key=lambda p: (len(p), p.relations, p.entities))


def enumerate_paths(
    kg: KnowledgeGraph,
    source: int,
    target: int,
    max_len: int,
    forbidden: Optional[int] = None,
) -> list[Path]:
    """Exhaustive oracle: every path of length <= max_len reaching target.

    Matches the walk semantics exactly: entity revisits are allowed, the
    target terminates a path (it never appears in an intermediate
    position), and forbidden direct edges are skipped.  Deterministically
    ordered by (length, ids).
    """
    banned = _forbidden_edges(kg, source, target, forbidden)
    results: list[Path] = []
    stack: list[tuple[list[int], list[int]]] = [([source], [])]
    while stack:
        ents, rels = stack.pop()
        if len(rels) >= max_len:
            continue
        cur = ents[-1]
        for rel, nxt in kg.out_edges(cur):
            if (cur, rel, nxt) in banned:
                continue
            if nxt == target:
                results.append(Path(tuple(ents + [nxt]), tuple(rels + [rel])))
            else:
                stack.append((ents + [nxt], rels + [rel]))
    results.sort(key=lambda p: (len(p), p.relations, p.entities))
    return results


def cap_paths(paths: list[Path], cap: int) -> list[Path]:
    """Keep at most ``cap`` paths, shortest first then lexicographic."""
    ordered = sorted(paths, key=lambda p: (len(p), p.relations, p.entities))
    return ordered[:cap]


# -- serialization ---------------------------------------------------------


def path_to_str(path: Path, kg: KnowledgeGraph) -> str:
    parts = [kg.entity_name(path.entities[0])]
    for i, r in enumerate(path.relations):
        parts.append(kg.relation_name(r))
        parts.append(kg.entity_name(path.entities[i + 1]))
    return "|".join(parts)


def path_from_str(text: str, kg: KnowledgeGraph) -> Path:
    parts = text.split("|")
    if len(parts) < 3 or len(parts) % 2 == 0:
        raise ParseError(f"malformed path serialization: {text!r}")
    try:
        ents = [kg.entity_ids[p] for p in parts[0::2]]
        rels = [kg.relation_ids[p] for p in parts[1::2]]
    except KeyError as exc:
        raise ParseError(f"unknown symbol {exc.args[0]!r} in path {text!r}") from exc
    return Path(tuple(ents), tuple(rels))


def write_path_file(pairs, kg: KnowledgeGraph, out) -> None:
    """One ``source<TAB>target<TAB>path;path;...`` line per entity pair."""
    for (source, target), paths in pairs:
        joined = ";".join(path_to_str(p, kg) for p in paths)
        out.write(f"{kg.entity_name(source)}\t{kg.entity_name(target)}\t{joined}\n")


def read_path_file(lines, kg: KnowledgeGraph):
    pairs = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(
                f"expected 3 tab-separated fields, got {len(fields)}", lineno
            )
        source = kg.entity_ids[fields[0]]
        target = kg.entity_ids[fields[1]]
        paths = [path_from_str(p, kg) for p in fields[2].split(";") if p]
        pairs.append(((source, target), paths))
    return pairs
