"""Knowledge graph loading, symbol interning, and adjacency indexing.

Entities and relations are interned to dense non-negative integer ids with
a bidirectional mapping to their UTF-8 surface names.  The adjacency index
maps each head entity to a sorted list of ``(relation, tail)`` edges and,
once :func:`with_inverses` has been applied, additionally contains one
reversed edge per stored triple under a fresh ``inv:<name>`` relation.

The graph is immutable after loading and safe for concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import ParseError

INVERSE_PREFIX = "inv:"


@dataclass(frozen=True, order=True)
class Triple:
    """A fact ``(head entity, relation, tail entity)`` in interned form."""

    head: int
    relation: int
    tail: int


@dataclass
class EntityMeta:
    """Per-entity metadata: display name, type labels, optional category."""

    entity: int
    name: str
    types: list[str] = field(default_factory=list)
    category: Optional[str] = None
    description: Optional[str] = None


@dataclass
class DatasetStats:
    """Corpus statistics in the shape of the standard dataset summary table."""

    triple_count: int = 0
    relation_type_count: int = 0
    entity_count: int = 0
    path_count: int = 0
    avg_paths_per_query_relation: float = 0.0
    avg_path_length: float = 0.0
    max_path_length: int = 0

    def as_rows(self) -> list[tuple[str, str]]:
        return [
            ("# Triples", str(self.triple_count)),
            ("# Relation types", str(self.relation_type_count)),
            ("# Entities", str(self.entity_count)),
            ("# Paths", str(self.path_count)),
            ("Avg. paths/query relation", f"{self.avg_paths_per_query_relation:g}"),
            ("Avg. path length", f"{self.avg_path_length:g}"),
            ("Max path length", str(self.max_path_length)),
        ]


class KnowledgeGraph:
    """Interned triple store with a head-indexed adjacency list.

    Attributes:
        entity_names: id -> surface name.
        relation_names: id -> surface name (inverse relations included once
            :func:`with_inverses` has run).
        triples: the deduplicated set of loaded (non-inverse) triples.
        metas: entity id -> :class:`EntityMeta`; entities absent from the
            metadata source get an empty type list.
        duplicate_count: number of duplicate triple lines collapsed at load.
    """

    def __init__(self) -> None:
        self.entity_names: list[str] = []
        self.entity_ids: dict[str, int] = {}
        self.relation_names: list[str] = []
        self.relation_ids: dict[str, int] = {}
        self.triples: set[Triple] = set()
        self.adjacency: dict[int, list[tuple[int, int]]] = {}
        self.metas: dict[int, EntityMeta] = {}
        self.inverse_of: dict[int, int] = {}
        self._inverse_ids: set[int] = set()
        self.duplicate_count = 0

    # -- interning ---------------------------------------------------------

    def intern_entity(self, name: str) -> int:
        eid = self.entity_ids.get(name)
        if eid is None:
            eid = len(self.entity_names)
            self.entity_ids[name] = eid
            self.entity_names.append(name)
        return eid

    def intern_relation(self, name: str) -> int:
        rid = self.relation_ids.get(name)
        if rid is None:
            rid = len(self.relation_names)
            self.relation_ids[name] = rid
            self.relation_names.append(name)
        return rid

    def entity_name(self, eid: int) -> str:
        return self.entity_names[eid]

    def relation_name(self, rid: int) -> str:
        return self.relation_names[rid]

    @property
    def has_inverses(self) -> bool:
        return bool(self.inverse_of)

    def is_inverse(self, rid: int) -> bool:
        return rid in self._inverse_ids

    def inverse(self, rid: int) -> int:
        """Paired inverse id of a relation (in either direction)."""
        return self.inverse_of[rid]

    def base_relations(self) -> list[int]:
        """Ids of the non-inverse relations, in interning order."""
        return [r for r in range(len(self.relation_names)) if not self.is_inverse(r)]

    # -- structure ---------------------------------------------------------

    def _add_edge(self, head: int, relation: int, tail: int) -> None:
        self.adjacency.setdefault(head, []).append((relation, tail))

    def add_triple(self, head: int, relation: int, tail: int) -> None:
        t = Triple(head, relation, tail)
        if t in self.triples:
            self.duplicate_count += 1
            return
        self.triples.add(t)
        self._add_edge(head, relation, tail)

    def _sort_adjacency(self) -> None:
        for edges in self.adjacency.values():
            edges.sort()

    def out_edges(self, entity: int) -> Sequence[tuple[int, int]]:
        return self.adjacency.get(entity, ())

    def has_edge(self, head: int, relation: int, tail: int) -> bool:
        return (relation, tail) in self.adjacency.get(head, ())

    def meta(self, entity: int) -> EntityMeta:
        m = self.metas.get(entity)
        if m is None:
            m = EntityMeta(entity=entity, name=self.entity_names[entity])
        return m

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)


def _as_lines(source) -> Iterable[str]:
    # Both open text files and lists of strings iterate line-wise.
    return () if source is None else source


def load_graph(triples_source, meta_source=None) -> KnowledgeGraph:
    """Load and intern a graph from triple and metadata line streams.

    Triple lines are ``head<TAB>relation<TAB>tail``; metadata lines are
    ``entity<TAB>name<TAB>types-comma-separated[<TAB>category]``.  Duplicate
    triples collapse silently with a counter exposed as ``duplicate_count``.

    Raises:
        ParseError: on a line with the wrong field count or an empty
            entity/relation string, naming the offending line number.
    """
    kg = KnowledgeGraph()
    for lineno, raw in enumerate(_as_lines(triples_source), start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(
                f"expected 3 tab-separated fields, got {len(fields)}", lineno
            )
        head, relation, tail = fields
        if not head or not relation or not tail:
            raise ParseError("empty entity or relation string", lineno)
        kg.add_triple(
            kg.intern_entity(head), kg.intern_relation(relation), kg.intern_entity(tail)
        )
    for lineno, raw in enumerate(_as_lines(meta_source), start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise ParseError(
                f"expected 3 or 4 tab-separated fields, got {len(fields)}", lineno
            )
        entity = fields[0]
        if not entity:
            raise ParseError("empty entity string", lineno)
        name = fields[1] or entity
        # Deduplicate type labels while preserving their input order.
        types: list[str] = []
        for t in fields[2].split(","):
            t = t.strip()
            if t and t not in types:
                types.append(t)
        category = fields[3] if len(fields) == 4 and fields[3] else None
        eid = kg.intern_entity(entity)
        kg.metas[eid] = EntityMeta(entity=eid, name=name, types=types, category=category)
    kg._sort_adjacency()
    return kg


def load_graph_files(triples_path: str, meta_path: Optional[str] = None) -> KnowledgeGraph:
    with open(triples_path, encoding="utf-8") as tf:
        if meta_path is None:
            return load_graph(tf)
        with open(meta_path, encoding="utf-8") as mf:
            return load_graph(tf, mf)


def with_inverses(kg: KnowledgeGraph) -> KnowledgeGraph:
    """Return a graph augmented with one reversed edge per stored triple.

    Each non-inverse relation ``r`` gets a paired fresh relation named
    ``inv:<name>``; every triple ``(a, r, b)`` contributes the adjacency
    edge ``(b, inv(r), a)``.  The stored triple set is unchanged and the
    operation is idempotent.
    """
    if kg.has_inverses:
        return kg
    aug = KnowledgeGraph()
    aug.entity_names = list(kg.entity_names)
    aug.entity_ids = dict(kg.entity_ids)
    aug.relation_names = list(kg.relation_names)
    aug.relation_ids = dict(kg.relation_ids)
    aug.metas = dict(kg.metas)
    aug.duplicate_count = kg.duplicate_count
    aug.triples = set(kg.triples)
    for rid, name in enumerate(kg.relation_names):
        inv_id = aug.intern_relation(INVERSE_PREFIX + name)
        aug.inverse_of[rid] = inv_id
        aug.inverse_of[inv_id] = rid
        aug._inverse_ids.add(inv_id)
    for t in kg.triples:
        aug._add_edge(t.head, t.relation, t.tail)
        aug._add_edge(t.tail, aug.inverse_of[t.relation], t.head)
    aug._sort_adjacency()
    return aug


def subgraph_without(kg: KnowledgeGraph, removed) -> KnowledgeGraph:
    """Copy of ``kg`` (before inverse augmentation) minus the given triples.

    Interned ids are preserved so instances and paths built against the
    original graph keep resolving.
    """
    if kg.has_inverses:
        raise ValueError("remove triples before inverse augmentation")
    removed_set = set(removed)
    sub = KnowledgeGraph()
    sub.entity_names = list(kg.entity_names)
    sub.entity_ids = dict(kg.entity_ids)
    sub.relation_names = list(kg.relation_names)
    sub.relation_ids = dict(kg.relation_ids)
    sub.metas = dict(kg.metas)
    for t in sorted(kg.triples):
        if t not in removed_set:
            sub.triples.add(t)
            sub._add_edge(t.head, t.relation, t.tail)
    sub._sort_adjacency()
    return sub


def graph_stats(kg: KnowledgeGraph, paths=None) -> DatasetStats:
    """Compute corpus statistics over non-inverse triples and relations.

    ``paths`` is an optional corpus given either as a flat iterable of
    :class:`~pathreason.paths.Path` or as a mapping from query relation id
    to such an iterable (enabling the per-query-relation average).
    """
    stats = DatasetStats(
        triple_count=len(kg.triples),
        relation_type_count=len(kg.base_relations()),
        entity_count=kg.n_entities,
    )
    if paths is None:
        return stats
    if isinstance(paths, dict):
        groups = {k: list(v) for k, v in paths.items()}
        flat = [p for group in groups.values() for p in group]
        if groups:
            stats.avg_paths_per_query_relation = len(flat) / len(groups)
    else:
        flat = list(paths)
    stats.path_count = len(flat)
    if flat:
        lengths = [len(p.relations) for p in flat]
        stats.avg_path_length = sum(lengths) / len(lengths)
        stats.max_path_length = max(lengths)
    return stats


def write_stats(stats: DatasetStats, out) -> None:
    """Emit statistics as ``key<TAB>value`` lines."""
    for key, value in stats.as_rows():
        out.write(f"{key}\t{value}\n")
