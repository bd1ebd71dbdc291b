"""Template rendering of entities and paths into textual statements.

Statements are the unit of exchange with the text encoder: each one
carries a stable 64-bit FNV-1a key over its UTF-8 bytes, so the engine and
the encoder can agree on identity without sharing any state beyond the
text itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, ParseError
from .graph import EntityMeta, KnowledgeGraph
from .paths import Path

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash of the UTF-8 encoding of ``text``."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass(frozen=True)
class Statement:
    key: int
    text: str
    kind: str  # "entity" | "path"

    @staticmethod
    def of(text: str, kind: str) -> "Statement":
        if not text:
            raise ValueError("statement text must be non-empty")
        return Statement(key=fnv1a64(text), text=text, kind=kind)


@dataclass(frozen=True)
class RelationTemplate:
    """Surface template with exactly one ``{head}`` and one ``{tail}``."""

    relation: int
    surface: str

    def __post_init__(self):
        for ph in ("{head}", "{tail}"):
            if self.surface.count(ph) != 1:
                raise ConfigError(
                    f"template {self.surface!r} must contain {ph} exactly once"
                )

    def render(self, head: str, tail: str) -> str:
        return self.surface.replace("{head}", head).replace("{tail}", tail)


class Verbalizer:
    """Renders entity and path statements for one graph.

    Inverse relations get auto-derived templates with head/tail swapped,
    so only base relations need entries in the template table.  In Latin
    mode clauses join with ", " and end with "."; otherwise path clauses
    join with the full-width comma and end with the ideographic full stop,
    matching the conventions of CJK source text.
    """

    def __init__(
        self,
        kg: KnowledgeGraph,
        templates: dict[int, RelationTemplate] | None = None,
        latin: bool = False,
    ):
        self.kg = kg
        self.templates = dict(templates or {})
        self.latin = latin

    @property
    def _clause_sep(self) -> str:
        return ", " if self.latin else "，"

    @property
    def _terminator(self) -> str:
        return "." if self.latin else "。"

    def _template_for(self, rid: int) -> RelationTemplate:
        tpl = self.templates.get(rid)
        if tpl is not None:
            return tpl
        if self.kg.is_inverse(rid):
            base = self.templates.get(self.kg.inverse(rid))
            if base is not None:
                swapped = (
                    base.surface.replace("{head}", "\x00")
                    .replace("{tail}", "{head}")
                    .replace("\x00", "{tail}")
                )
                tpl = RelationTemplate(relation=rid, surface=swapped)
                self.templates[rid] = tpl
                return tpl
        raise ConfigError(
            f"no template configured for relation {self.kg.relation_name(rid)!r}"
        )

    def entity_statement(self, meta: EntityMeta) -> Statement:
        """Name, category, and first type, comma-joined and terminated.

        Missing fields drop out together with their separator, so an
        entity with a bare name renders as just ``<name>`` plus the
        terminator.
        """
        parts = [meta.name]
        if meta.category:
            parts.append(meta.category)
        if meta.types:
            parts.append(meta.types[0])
        return Statement.of(", ".join(parts) + self._terminator, "entity")

    def entity_statement_for(self, entity: int) -> Statement:
        return self.entity_statement(self.kg.meta(entity))

    def path_statement(self, path: Path) -> Statement:
        """One clause per hop, clause-joined and terminated.

        The encoder adds its own sequence markers; none appear here.
        """
        clauses = []
        for head, rel, tail in path.hops():
            tpl = self._template_for(rel)
            clauses.append(
                tpl.render(self.kg.entity_name(head), self.kg.entity_name(tail))
            )
        return Statement.of(self._clause_sep.join(clauses) + self._terminator, "path")


def load_templates(lines, kg: KnowledgeGraph) -> dict[int, RelationTemplate]:
    """Read a ``relation<TAB>surface`` template table."""
    templates: dict[int, RelationTemplate] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(
                f"expected 2 tab-separated fields, got {len(fields)}", lineno
            )
        name, surface = fields
        rid = kg.relation_ids.get(name)
        if rid is None:
            raise ParseError(f"unknown relation {name!r}", lineno)
        templates[rid] = RelationTemplate(relation=rid, surface=surface)
    return templates


def write_statements(statements, out) -> None:
    """Statement export for the encoder: ``key-hex<TAB>text`` per line."""
    seen: set[int] = set()
    for s in statements:
        if s.key in seen:
            continue
        seen.add(s.key)
        out.write(f"{s.key:016x}\t{s.text}\n")


def read_statements(lines) -> list[Statement]:
    statements = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(
                f"expected 2 tab-separated fields, got {len(fields)}", lineno
            )
        key = int(fields[0], 16)
        if key != fnv1a64(fields[1]):
            raise ParseError("statement key does not match its text", lineno)
        statements.append(Statement(key=key, text=fields[1], kind="path"))
    return statements
