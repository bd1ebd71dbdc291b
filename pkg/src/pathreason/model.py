"""Forward pass, loss, and exact analytic gradients for both reasoners.

Model A composes each path with a rectifier RNN over relation embeddings
and text-enhanced entity vectors; model B projects the path statement's
text vector directly.  Both share attention pooling over the per-path
vectors and a sigmoid match score against a learned query-relation
embedding:

    pi_i   per-path vector (model-specific)
    z_i    = tanh(pi_i T) . delta
    alpha  = softmax(z)
    ep     = tanh(sum_i alpha_i pi_i)
    P      = sigmoid(ep . delta)

Gradients are derived by hand (no autodiff) and verified against central
finite differences in the test suite.  All arithmetic is float64; path
summations run in sorted-path order so results are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .embeddings import TextEmbeddingStore, lookup
from .graph import KnowledgeGraph
from .paths import Path
from .verbalize import Verbalizer

NO_EVIDENCE_PROB = 0.5
PROB_CLAMP = 1e-12

_TENSOR_ORDER = ("rel", "query", "type_emb", "r_dummy", "W1", "W2", "W3", "T", "Wp", "bp")
_TRAINABLE = {
    "A": ("rel", "query", "type_emb", "r_dummy", "W1", "W2", "W3", "T"),
    "B": ("query", "T", "Wp", "bp"),
}
# Non-embedding tensors, always L2-regularized in full for their model kind.
_WEIGHTS = {
    "A": ("W1", "W2", "W3", "T", "r_dummy"),
    "B": ("T", "Wp", "bp"),
}


@dataclass
class HyperParams:
    d: int
    m: int
    H: int
    lam: float = 1e-5

    def __post_init__(self):
        if min(self.d, self.m, self.H) < 1:
            raise ValueError("d, m, H must all be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")

    @property
    def k(self) -> int:
        # Width of the enhanced entity vector: type average + text vector.
        return self.m + self.H


class FeatureContext:
    """Binds graph, verbalizer, and embedding store; caches entity/path text.

    ``mode`` is the embedding lookup mode: ``strict`` or ``synthetic``.
    """

    def __init__(
        self,
        kg: KnowledgeGraph,
        verbalizer: Verbalizer,
        store: TextEmbeddingStore,
        mode: str = "strict",
        seed: int = 0,
    ):
        self.kg = kg
        self.verbalizer = verbalizer
        self.store = store
        self.mode = mode
        self.seed = seed
        self.type_labels = sorted({t for m in kg.metas.values() for t in m.types})
        self._ent_cache: dict[int, np.ndarray] = {}
        self._path_cache: dict[Path, np.ndarray] = {}

    def entity_text_vector(self, entity: int) -> np.ndarray:
        vec = self._ent_cache.get(entity)
        if vec is None:
            stmt = self.verbalizer.entity_statement_for(entity)
            vec = lookup(self.store, stmt.key, self.mode, self.seed)
            self._ent_cache[entity] = vec
        return vec

    def path_text_vector(self, path: Path) -> np.ndarray:
        vec = self._path_cache.get(path)
        if vec is None:
            stmt = self.verbalizer.path_statement(path)
            vec = lookup(self.store, stmt.key, self.mode, self.seed)
            self._path_cache[path] = vec
        return vec


@dataclass
class ModelParams:
    """All trainable tensors plus the vocabularies their rows are bound to."""

    kind: str
    hyper: HyperParams
    seed: int
    rel_names: list[str]
    query_names: list[str]
    type_labels: list[str]
    rel: np.ndarray
    query: np.ndarray
    type_emb: np.ndarray  # one extra final row shared by untyped entities
    r_dummy: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    W3: np.ndarray
    T: np.ndarray
    Wp: np.ndarray
    bp: np.ndarray

    def __post_init__(self):
        self._rel_row = {name: i for i, name in enumerate(self.rel_names)}
        self._query_row = {name: i for i, name in enumerate(self.query_names)}
        self._type_row = {name: i for i, name in enumerate(self.type_labels)}

    @property
    def untyped_row(self) -> int:
        return len(self.type_labels)

    def rel_row(self, kg: KnowledgeGraph, rid: int) -> int:
        return self._rel_row[kg.relation_name(rid)]

    def query_row(self, kg: KnowledgeGraph, rid: int) -> int:
        return self._query_row[kg.relation_name(rid)]

    def type_rows(self, labels) -> tuple[int, ...]:
        rows = tuple(self._type_row[t] for t in labels if t in self._type_row)
        return rows if rows else (self.untyped_row,)

    def tensors(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in _TENSOR_ORDER}

    def trainable_names(self) -> tuple[str, ...]:
        return _TRAINABLE[self.kind]


def init_params(
    ctx: FeatureContext, kind: str, d: int, m: int, lam: float = 1e-5, seed: int = 0
) -> ModelParams:
    """Seed-deterministic uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init.

    The model-B projection is identity-initialized when d equals the text
    width, so the projected path vector starts out as the raw text vector.
    """
    if kind not in ("A", "B"):
        raise ValueError("kind must be 'A' or 'B'")
    H = ctx.store.dim
    hyper = HyperParams(d=d, m=m, H=H, lam=lam)
    kg = ctx.kg
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    rel = uniform((len(kg.relation_names), d), d)
    query = uniform((len(kg.base_relations()), d), d)
    type_emb = uniform((len(ctx.type_labels) + 1, m), m)
    r_dummy = uniform((d,), d)
    W1 = uniform((d, d), d)
    W2 = uniform((d, d), d)
    W3 = uniform((d, hyper.k), hyper.k)
    T = uniform((d, d), d)
    Wp = np.eye(d, H) if d == H else uniform((d, H), H)
    bp = np.zeros(d)
    return ModelParams(
        kind=kind,
        hyper=hyper,
        seed=seed,
        rel_names=list(kg.relation_names),
        query_names=[kg.relation_name(r) for r in kg.base_relations()],
        type_labels=list(ctx.type_labels),
        rel=rel,
        query=query,
        type_emb=type_emb,
        r_dummy=r_dummy,
        W1=W1,
        W2=W2,
        W3=W3,
        T=T,
        Wp=Wp,
        bp=bp,
    )


def zero_grads(params: ModelParams) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.tensors().items()}


# -- forward pass ----------------------------------------------------------


@dataclass
class StepTrace:
    h_prev: np.ndarray
    mask: np.ndarray  # rectifier derivative at the pre-activation
    rel_row: int  # row into params.rel, or -1 for the dummy relation
    type_rows: tuple[int, ...]
    ehat: np.ndarray


@dataclass
class PathTrace:
    path: Path
    pi: np.ndarray
    steps: list[StepTrace] = field(default_factory=list)  # model A
    text_vec: Optional[np.ndarray] = None  # model B


@dataclass
class ForwardTrace:
    instance: object
    prob: float
    query_row: int = -1
    path_traces: list[PathTrace] = field(default_factory=list)
    pis: Optional[np.ndarray] = None
    att: Optional[np.ndarray] = None  # tanh(pi T), per path
    z: Optional[np.ndarray] = None
    alpha: Optional[np.ndarray] = None
    pooled_pre: Optional[np.ndarray] = None  # sum_i alpha_i pi_i
    ep: Optional[np.ndarray] = None
    score: float = 0.0

    @property
    def has_paths(self) -> bool:
        return bool(self.path_traces)


def enhance_entity(entity: int, params: ModelParams, ctx: FeatureContext) -> np.ndarray:
    """Concatenate the entity's mean type embedding with its text vector."""
    rows = params.type_rows(ctx.kg.meta(entity).types)
    type_part = params.type_emb[list(rows)].mean(axis=0)
    return np.concatenate([type_part, ctx.entity_text_vector(entity)])


def _entity_feature(entity, params, ctx) -> tuple[tuple[int, ...], np.ndarray]:
    rows = params.type_rows(ctx.kg.meta(entity).types)
    type_part = params.type_emb[list(rows)].mean(axis=0)
    return rows, np.concatenate([type_part, ctx.entity_text_vector(entity)])


def _encode_path_A(path: Path, params, ctx) -> PathTrace:
    d = params.hyper.d
    h = np.zeros(d)
    steps: list[StepTrace] = []
    # One step per hop consuming (h, r_t, e_{t-1}), then a final dummy-relation
    # step so the target-side entity also reaches the path vector.
    consumed = [
        (params.rel_row(ctx.kg, r), path.entities[i])
        for i, r in enumerate(path.relations)
    ]
    consumed.append((-1, path.entities[-1]))
    for rel_row, entity in consumed:
        r_vec = params.r_dummy if rel_row < 0 else params.rel[rel_row]
        type_rows, ehat = _entity_feature(entity, params, ctx)
        pre = params.W1 @ h + params.W2 @ r_vec + params.W3 @ ehat
        mask = (pre > 0).astype(float)
        steps.append(StepTrace(h_prev=h, mask=mask, rel_row=rel_row,
                               type_rows=type_rows, ehat=ehat))
        h = pre * mask
    return PathTrace(path=path, pi=h, steps=steps)


def encode_path_A(path: Path, params: ModelParams, ctx: FeatureContext) -> np.ndarray:
    return _encode_path_A(path, params, ctx).pi


def _encode_path_B(path: Path, params, ctx) -> PathTrace:
    c = ctx.path_text_vector(path)
    return PathTrace(path=path, pi=params.Wp @ c + params.bp, text_vec=c)


def encode_path_B(path: Path, params: ModelParams, ctx: FeatureContext) -> np.ndarray:
    return _encode_path_B(path, params, ctx).pi


def attend(
    pis: np.ndarray, delta: np.ndarray, params: ModelParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Attention pooling: returns (z, alpha, ep) for >= 1 path vectors."""
    att = np.tanh(pis @ params.T)
    z = att @ delta
    shifted = np.exp(z - z.max())
    alpha = shifted / shifted.sum()
    ep = np.tanh(alpha @ pis)
    return z, alpha, ep


def score_pair(instance, params: ModelParams, ctx: FeatureContext) -> ForwardTrace:
    """Forward pass for one query instance.

    Zero-path instances carry no evidence and score the neutral
    ``sigmoid(0) = 0.5`` with an empty trace.
    """
    paths = sorted(instance.paths, key=lambda p: (len(p), p.relations, p.entities))
    qrow = params.query_row(ctx.kg, instance.relation)
    if not paths:
        return ForwardTrace(instance=instance, prob=NO_EVIDENCE_PROB, query_row=qrow)
    encode = _encode_path_A if params.kind == "A" else _encode_path_B
    path_traces = [encode(p, params, ctx) for p in paths]
    pis = np.stack([pt.pi for pt in path_traces])
    delta = params.query[qrow]
    att = np.tanh(pis @ params.T)
    z = att @ delta
    shifted = np.exp(z - z.max())
    alpha = shifted / shifted.sum()
    pooled_pre = alpha @ pis
    ep = np.tanh(pooled_pre)
    score = float(ep @ delta)
    prob = float(1.0 / (1.0 + np.exp(-score)))
    return ForwardTrace(
        instance=instance,
        prob=prob,
        query_row=qrow,
        path_traces=path_traces,
        pis=pis,
        att=att,
        z=z,
        alpha=alpha,
        pooled_pre=pooled_pre,
        ep=ep,
        score=score,
    )


# -- loss and gradients ----------------------------------------------------


def _l2_row_sets(traces, params: ModelParams) -> dict[str, set[int]]:
    """Embedding rows touched by the batch, per regularized table."""
    rows: dict[str, set[int]] = {"rel": set(), "query": set(), "type_emb": set()}
    for tr in traces:
        if not tr.has_paths:
            continue
        rows["query"].add(tr.query_row)
        if params.kind == "A":
            for pt in tr.path_traces:
                for st in pt.steps:
                    if st.rel_row >= 0:
                        rows["rel"].add(st.rel_row)
                    rows["type_emb"].update(st.type_rows)
    return rows


def _l2_value(traces, params: ModelParams, lam: float) -> float:
    if lam == 0.0:
        return 0.0
    total = 0.0
    for name in _WEIGHTS[params.kind]:
        arr = getattr(params, name)
        total += float(np.sum(arr * arr))
    for name, rows in _l2_row_sets(traces, params).items():
        if name in _TRAINABLE[params.kind] and rows:
            arr = getattr(params, name)[sorted(rows)]
            total += float(np.sum(arr * arr))
    return lam * total


def nll(trace: ForwardTrace) -> float:
    p = min(max(trace.prob, PROB_CLAMP), 1.0 - PROB_CLAMP)
    return -np.log(p) if trace.instance.label else -np.log1p(-p)


def loss_batch(traces, params: ModelParams, lam: Optional[float] = None) -> float:
    """Negative log-likelihood plus L2 over weights and touched rows."""
    lam = params.hyper.lam if lam is None else lam
    return sum(nll(tr) for tr in traces) + _l2_value(traces, params, lam)


def _backprop_instance(trace: ForwardTrace, params: ModelParams, grads) -> None:
    if not trace.has_paths:
        return
    y = 1.0 if trace.instance.label else 0.0
    delta = params.query[trace.query_row]
    g_score = trace.prob - y  # d nll / d score through the sigmoid
    # ep = tanh(pooled_pre); score = ep . delta
    grads["query"][trace.query_row] += g_score * trace.ep
    g_pool = g_score * delta * (1.0 - trace.ep**2)
    # pooled_pre = sum_i alpha_i pi_i
    g_alpha = trace.pis @ g_pool
    g_z = trace.alpha * (g_alpha - float(trace.alpha @ g_alpha))
    # z_i = tanh(pi_i T) . delta
    grads["query"][trace.query_row] += g_z @ trace.att
    g_att = np.outer(g_z, delta)
    g_t = g_att * (1.0 - trace.att**2)
    grads["T"] += trace.pis.T @ g_t
    g_pis = np.outer(trace.alpha, g_pool) + g_t @ params.T.T
    for i, pt in enumerate(trace.path_traces):
        g_pi = g_pis[i]
        if params.kind == "B":
            grads["Wp"] += np.outer(g_pi, pt.text_vec)
            grads["bp"] += g_pi
            continue
        g_h = g_pi
        m = params.hyper.m
        for st in reversed(pt.steps):
            g_pre = g_h * st.mask
            grads["W1"] += np.outer(g_pre, st.h_prev)
            r_vec_grad = params.W2.T @ g_pre
            if st.rel_row < 0:
                grads["r_dummy"] += r_vec_grad
            else:
                grads["rel"][st.rel_row] += r_vec_grad
            grads["W2"] += np.outer(
                g_pre,
                params.r_dummy if st.rel_row < 0 else params.rel[st.rel_row],
            )
            grads["W3"] += np.outer(g_pre, st.ehat)
            g_ehat = params.W3.T @ g_pre
            g_type = g_ehat[:m] / len(st.type_rows)
            for row in st.type_rows:
                grads["type_emb"][row] += g_type
            g_h = params.W1.T @ g_pre


def grad_batch(
    instances, params: ModelParams, ctx: FeatureContext, lam: Optional[float] = None
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and exact gradients for a batch, accumulated in given order.

    Tensors the model kind does not train (and embedding rows the batch
    never touches) come back as zero arrays.
    """
    lam = params.hyper.lam if lam is None else lam
    traces = [score_pair(inst, params, ctx) for inst in instances]
    grads = zero_grads(params)
    for tr in traces:
        _backprop_instance(tr, params, grads)
    if lam != 0.0:
        for name in _WEIGHTS[params.kind]:
            grads[name] += 2.0 * lam * getattr(params, name)
        for name, rows in _l2_row_sets(traces, params).items():
            if name in _TRAINABLE[params.kind] and rows:
                idx = sorted(rows)
                grads[name][idx] += 2.0 * lam * getattr(params, name)[idx]
    return loss_batch(traces, params, lam), grads


def permute_relation_embeddings(params: ModelParams, seed: int = 0) -> ModelParams:
    """Diagnostic ablation: derange the relation and query embedding rows.

    Every row moves to a different relation's slot, so any signal carried
    by relation-specific embeddings is destroyed while the rest of the
    model is untouched.
    """
    from dataclasses import replace

    rng = np.random.default_rng(seed)

    def derange(n: int) -> np.ndarray:
        if n < 2:
            return np.arange(n)
        while True:
            perm = rng.permutation(n)
            if not np.any(perm == np.arange(n)):
                return perm

    return replace(
        params,
        rel=params.rel[derange(params.rel.shape[0])].copy(),
        query=params.query[derange(params.query.shape[0])].copy(),
    )


# -- checkpoints -----------------------------------------------------------

_CKPT_MAGIC = "pathreason-checkpoint"
_CKPT_VERSION = 1


def save_checkpoint(params: ModelParams, path: str) -> None:
    """Text header plus named float32 tensors in declaration order."""
    lines = [
        f"{_CKPT_MAGIC}\t{_CKPT_VERSION}",
        f"kind\t{params.kind}",
        f"d\t{params.hyper.d}",
        f"m\t{params.hyper.m}",
        f"H\t{params.hyper.H}",
        f"lam\t{params.hyper.lam!r}",
        f"seed\t{params.seed}",
        "relations\t" + "\t".join(params.rel_names),
        "queries\t" + "\t".join(params.query_names),
        "types\t" + "\t".join(params.type_labels),
        "tensors\t" + "\t".join(_TENSOR_ORDER),
    ]
    with open(path, "wb") as f:
        # Blank line terminates the header; binary payload follows.
        f.write(("\n".join(lines) + "\n\n").encode("utf-8"))
        for name in _TENSOR_ORDER:
            f.write(getattr(params, name).astype("<f4").tobytes())


def load_checkpoint(path: str) -> ModelParams:
    from .errors import FormatError

    with open(path, "rb") as f:
        data = f.read()
    sep = data.find(b"\n\n")
    if sep < 0:
        raise FormatError("missing checkpoint header terminator")
    header: dict[str, list[str]] = {}
    lines = data[:sep].decode("utf-8").split("\n")
    first = lines[0].split("\t")
    if first[0] != _CKPT_MAGIC or first[1] != str(_CKPT_VERSION):
        raise FormatError(f"not a version-{_CKPT_VERSION} checkpoint")
    for line in lines[1:]:
        fields = line.split("\t")
        header[fields[0]] = fields[1:]
    kind = header["kind"][0]
    hyper = HyperParams(
        d=int(header["d"][0]),
        m=int(header["m"][0]),
        H=int(header["H"][0]),
        lam=float(header["lam"][0]),
    )
    # An empty vocabulary serializes as a bare "name\t" line; drop the
    # empty string that split() produces for it.
    rel_names = [n for n in header.get("relations", []) if n]
    query_names = [n for n in header.get("queries", []) if n]
    type_labels = [n for n in header.get("types", []) if n]
    shapes = {
        "rel": (len(rel_names), hyper.d),
        "query": (len(query_names), hyper.d),
        "type_emb": (len(type_labels) + 1, hyper.m),
        "r_dummy": (hyper.d,),
        "W1": (hyper.d, hyper.d),
        "W2": (hyper.d, hyper.d),
        "W3": (hyper.d, hyper.k),
        "T": (hyper.d, hyper.d),
        "Wp": (hyper.d, hyper.H),
        "bp": (hyper.d,),
    }
    offset = sep + 2
    tensors = {}
    for name in _TENSOR_ORDER:
        count = int(np.prod(shapes[name]))
        end = offset + 4 * count
        if end > len(data):
            raise FormatError("truncated tensor payload", offset=offset)
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        tensors[name] = arr.astype(np.float64).reshape(shapes[name])
        offset = end
    if offset != len(data):
        raise FormatError("trailing bytes after final tensor", offset=offset)
    return ModelParams(
        kind=kind,
        hyper=hyper,
        seed=int(header.get("seed", ["0"])[0]),
        rel_names=rel_names,
        query_names=query_names,
        type_labels=type_labels,
        **tensors,
    )
