"""Ranking evaluation (per-relation average precision, corpus MAP) and
attention-based explanations.

Each query relation pools all of its scored test instances into one
ranked list; MAP is the unweighted mean of the per-relation AP values.
Ties are broken deterministically: descending probability, then ascending
instance serialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dataset import QueryInstance, instance_to_line
from .graph import KnowledgeGraph
from .model import FeatureContext, ForwardTrace, ModelParams, score_pair
from .verbalize import Verbalizer


@dataclass
class RelationRow:
    relation: int
    name: str
    ap: float
    positives: int
    negatives: int


@dataclass
class EvalReport:
    rows: list[RelationRow]
    map_score: float
    model_id: str = ""
    skipped: list[str] = field(default_factory=list)  # relations with no positives


def average_precision(ranked_labels) -> float | None:
    """Mean of precision@k at the ranks of the relevant items.

    ``ranked_labels`` is ordered by descending score with ties already
    broken.  Returns None when the list has no relevant item (the caller
    excludes such relations from MAP).
    """
    hits = 0
    precision_sum = 0.0
    for rank, relevant in enumerate(ranked_labels, start=1):
        if relevant:
            hits += 1
            precision_sum += hits / rank
    if hits == 0:
        return None
    return precision_sum / hits


def score_instances(
    instances, params: ModelParams, ctx: FeatureContext
) -> list[tuple[QueryInstance, ForwardTrace]]:
    return [(inst, score_pair(inst, params, ctx)) for inst in instances]


def mean_average_precision(
    scored, kg: KnowledgeGraph, model_id: str = ""
) -> EvalReport:
    """Build the per-relation AP table and MAP from (instance, prob) pairs.

    ``scored`` may hold probabilities or full forward traces in the second
    slot.  Report rows come back sorted by relation id.
    """
    by_relation: dict[int, list[tuple[QueryInstance, float]]] = {}
    for inst, scored_value in scored:
        prob = scored_value.prob if isinstance(scored_value, ForwardTrace) else scored_value
        by_relation.setdefault(inst.relation, []).append((inst, prob))
    rows: list[RelationRow] = []
    skipped: list[str] = []
    for relation in sorted(by_relation):
        group = by_relation[relation]
        group.sort(key=lambda pair: (-pair[1], instance_to_line(pair[0], kg)))
        ap = average_precision([inst.label for inst, _ in group])
        if ap is None:
            skipped.append(kg.relation_name(relation))
            continue
        rows.append(
            RelationRow(
                relation=relation,
                name=kg.relation_name(relation),
                ap=ap,
                positives=sum(1 for inst, _ in group if inst.label),
                negatives=sum(1 for inst, _ in group if not inst.label),
            )
        )
    map_score = sum(r.ap for r in rows) / len(rows) if rows else 0.0
    return EvalReport(rows=rows, map_score=map_score, model_id=model_id, skipped=skipped)


def write_report(report: EvalReport, out) -> None:
    """Report TSV: per-relation rows plus a final MAP line."""
    for row in report.rows:
        out.write(f"{row.name}\t{row.ap:.6f}\t{row.positives}\t{row.negatives}\n")
    out.write(f"MAP\t{report.map_score:.6f}\n")


NO_EVIDENCE_MARKER = "(no evidence paths)"


def explain_instance(
    instance: QueryInstance,
    trace: ForwardTrace,
    kg: KnowledgeGraph,
    verbalizer: Verbalizer,
) -> str:
    """Render the attention case-study block for one scored instance.

    Shows the query, the probability, and the highest- and lowest-weight
    path statements with their attention weights.
    """
    query = (
        f"{kg.relation_name(instance.relation)}"
        f"({kg.entity_name(instance.source)}, {kg.entity_name(instance.target)})?"
    )
    lines = [f"Query\t{query}", f"P\t{trace.prob:.6f}"]
    if not trace.has_paths:
        lines.append(f"High weight\t{NO_EVIDENCE_MARKER}")
        lines.append(f"Low weight\t{NO_EVIDENCE_MARKER}")
        return "\n".join(lines) + "\n"
    order = trace.alpha.argsort()
    hi = int(order[-1])
    lo = int(order[0])
    hi_text = verbalizer.path_statement(trace.path_traces[hi].path).text
    lo_text = verbalizer.path_statement(trace.path_traces[lo].path).text
    lines.append(f"High weight\t{trace.alpha[hi]:.4f}\t{hi_text}")
    lines.append(f"Low weight\t{trace.alpha[lo]:.4f}\t{lo_text}")
    return "\n".join(lines) + "\n"
