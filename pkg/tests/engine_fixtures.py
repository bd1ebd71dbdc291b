"""Shared test helpers: a small clinical KG with CJK surface names and
builders for random graphs, feature contexts, and oracle computations."""

from __future__ import annotations

import numpy as np

from pathreason import (
    FeatureContext,
    KnowledgeGraph,
    RelationTemplate,
    TextEmbeddingStore,
    Verbalizer,
    load_graph,
    with_inverses,
)

# Eight entities, four relation types, nine edges.  The 2-hop and 3-hop
# routes from the venous-drainage disease to the respiratory department
# exercise multi-hop extraction and verbalization.
CLINICAL_TRIPLES = [
    "肺静脉畸形引流\t疾病相关症状\t呼吸窘迫",
    "呼吸窘迫\t症状相关科室\t呼吸内科",
    "肺静脉畸形引流\t疾病相关症状\t鼓槌指",
    "鼓槌指\t症状相关症状\t肺淋巴管肌瘤",
    "肺淋巴管肌瘤\t症状相关科室\t呼吸内科",
    "呼吸窘迫\t症状相关疾病\t血气胸",
    "肺静脉畸形引流\t疾病相关症状\t发绀",
    "发绀\t症状相关症状\t呼吸窘迫",
    "血气胸\t疾病相关症状\t胸痛",
]

CLINICAL_META = [
    "肺静脉畸形引流\t肺静脉畸形引流\t疾病\t疾病",
    "呼吸窘迫\t呼吸窘迫\t症状\t症状",
    "呼吸内科\t呼吸内科\t科室\t科室",
    "鼓槌指\t鼓槌指\t症状\t症状",
    "肺淋巴管肌瘤\t肺淋巴管肌瘤\t疾病\t疾病",
    "血气胸\t血气胸\t疾病\t疾病",
    "发绀\t发绀\t症状\t症状",
    "胸痛\t胸痛\t症状\t症状",
]

CLINICAL_TEMPLATES = {
    "疾病相关症状": "{head}疾病的相关症状是{tail}",
    "症状相关科室": "{head}症状的相关科室是{tail}",
    "症状相关症状": "{head}症状的相关症状是{tail}",
    "症状相关疾病": "{head}症状的相关疾病是{tail}",
}


def make_verbalizer(kg: KnowledgeGraph, latin: bool = False) -> Verbalizer:
    templates = {}
    for name, surface in CLINICAL_TEMPLATES.items():
        rid = kg.relation_ids.get(name)
        if rid is not None:
            templates[rid] = RelationTemplate(relation=rid, surface=surface)
    return Verbalizer(kg, templates, latin=latin)


def random_graph(
    rng: np.random.Generator,
    n_entities: int = 30,
    n_relations: int = 4,
    n_edges: int = 60,
    with_meta: bool = True,
) -> KnowledgeGraph:
    """A random directed multigraph with optional type metadata."""
    triples = []
    for _ in range(n_edges):
        h = int(rng.integers(n_entities))
        t = int(rng.integers(n_entities))
        r = int(rng.integers(n_relations))
        triples.append(f"N{h}\tR{r}\tN{t}")
    meta = None
    if with_meta:
        meta = [
            f"N{i}\tN{i}\tT{int(rng.integers(3))}\tC{int(rng.integers(2))}"
            for i in range(n_entities)
        ]
    return load_graph(triples, meta)


def generic_verbalizer(kg: KnowledgeGraph) -> Verbalizer:
    """Templates for every base relation of a random graph."""
    templates = {
        rid: RelationTemplate(
            relation=rid, surface="{head} " + kg.relation_name(rid) + " {tail}"
        )
        for rid in kg.base_relations()
    }
    return Verbalizer(kg, templates, latin=True)


def make_context(
    kg: KnowledgeGraph, dim: int = 12, seed: int = 0
) -> FeatureContext:
    """Synthetic-mode feature context over an inverse-augmented graph."""
    aug = with_inverses(kg)
    store = TextEmbeddingStore(dim=dim)
    return FeatureContext(aug, generic_verbalizer(aug), store, mode="synthetic", seed=seed)


def build_random_instances(
    ctx: FeatureContext,
    rng: np.random.Generator,
    n_instances: int,
    max_paths: int = 3,
    max_hops: int = 3,
    require_paths: bool = True,
):
    """Random labeled query instances whose paths come from enumeration."""
    from pathreason import QueryInstance, enumerate_paths

    kg = ctx.kg
    queries = kg.base_relations()
    instances = []
    seen = set()
    guard = 0
    while len(instances) < n_instances:
        guard += 1
        if guard > 200 * n_instances:
            raise RuntimeError("graph too sparse to build the requested instances")
        s = int(rng.integers(kg.n_entities))
        t = int(rng.integers(kg.n_entities))
        if s == t:
            continue
        rel = queries[int(rng.integers(len(queries)))]
        if (s, t, rel) in seen:
            continue
        seen.add((s, t, rel))
        paths = enumerate_paths(kg, s, t, max_len=max_hops, forbidden=rel)
        if require_paths and not paths:
            continue
        keep = paths[: int(rng.integers(1, max_paths + 1))] if paths else []
        label = bool(rng.integers(2))
        instances.append(QueryInstance(s, t, rel, label, keep))
    return instances


def oracle_probability(inst, params, ctx) -> float:
    """Straight-line re-implementation of the forward pass."""
    paths = sorted(inst.paths, key=lambda p: (len(p), p.relations, p.entities))
    delta = params.query[params.query_row(ctx.kg, inst.relation)]
    if not paths:
        return 0.5
    pis = []
    for p in paths:
        if params.kind == "A":
            h = np.zeros(params.hyper.d)
            hops = [
                (params.rel[params.rel_row(ctx.kg, r)], p.entities[i])
                for i, r in enumerate(p.relations)
            ]
            hops.append((params.r_dummy, p.entities[-1]))
            for r_vec, entity in hops:
                rows = params.type_rows(ctx.kg.meta(entity).types)
                type_part = params.type_emb[list(rows)].mean(axis=0)
                ehat = np.concatenate([type_part, ctx.entity_text_vector(entity)])
                pre = params.W1 @ h + params.W2 @ r_vec + params.W3 @ ehat
                h = np.maximum(pre, 0.0)
            pis.append(h)
        else:
            pis.append(params.Wp @ ctx.path_text_vector(p) + params.bp)
    z = np.array([np.tanh(pi @ params.T) @ delta for pi in pis])
    weights = np.exp(z - z.max())
    alpha = weights / weights.sum()
    pooled = sum(a * pi for a, pi in zip(alpha, pis))
    ep = np.tanh(pooled)
    return float(1.0 / (1.0 + np.exp(-(ep @ delta))))


def finite_difference_grads(
    instances, params, ctx, lam: float, step: float = 1e-3
) -> dict[str, np.ndarray]:
    """Central-difference loss gradients for every trainable tensor."""
    from pathreason import score_pair
    from pathreason.model import loss_batch

    def batch_loss():
        traces = [score_pair(i, params, ctx) for i in instances]
        return loss_batch(traces, params, lam=lam)

    grads = {}
    for name in params.trainable_names():
        tensor = getattr(params, name)
        grad = np.zeros_like(tensor)
        flat = tensor.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = batch_loss()
            flat[i] = orig - step
            down = batch_loss()
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * step)
        grads[name] = grad
    return grads


def max_relative_error(analytic: dict, numeric: dict, names) -> float:
    worst = 0.0
    for name in names:
        a = analytic[name]
        f = numeric[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-3)
        worst = max(worst, float(np.max(np.abs(a - f) / denom)))
    return worst
