"""Mini-batch Adam training with accuracy-based early stopping and grid
search.

One model is trained for all query relations, so batches mix relations.
Training is bitwise reproducible: epoch shuffles derive from the config
seed, batches accumulate gradients in list order, and the returned
checkpoint is the epoch snapshot with the best development accuracy
(earliest epoch on ties).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .model import (
    FeatureContext,
    ModelParams,
    init_params,
    grad_batch,
    score_pair,
)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 100
    lam: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 10
    min_delta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        positives = (
            self.learning_rate,
            self.batch_size,
            self.epochs,
            self.beta1,
            self.beta2,
            self.eps,
        )
        if any(v <= 0 for v in positives) or self.lam < 0:
            raise ValueError("train config values must be positive")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass
class GridSpec:
    learning_rates: tuple[float, ...] = (0.0001, 0.001, 0.002, 0.0025, 0.003)
    dims: tuple[int, ...] = (50, 100, 150, 200, 250, 300)
    type_dims: tuple[int, ...] = (50, 100, 150, 200, 250, 300)

    def __post_init__(self):
        if not (self.learning_rates and self.dims and self.type_dims):
            raise ValueError("grid axes must be non-empty")

    def cells(self):
        """Learning-rate-major enumeration, then hidden dim, then type dim."""
        for lr in self.learning_rates:
            for d in self.dims:
                for m in self.type_dims:
                    yield lr, d, m


class AdamState:
    """First/second moment accumulators per trainable tensor."""

    def __init__(self, params: ModelParams):
        self.step = 0
        self.m = {n: np.zeros_like(getattr(params, n)) for n in params.trainable_names()}
        self.v = {n: np.zeros_like(getattr(params, n)) for n in params.trainable_names()}


def adam_update(
    params: ModelParams, grads: dict, state: AdamState, cfg: TrainConfig
) -> None:
    """Standard bias-corrected Adam step, applied in place."""
    state.step += 1
    t = state.step
    for name in params.trainable_names():
        g = grads[name]
        state.m[name] = cfg.beta1 * state.m[name] + (1 - cfg.beta1) * g
        state.v[name] = cfg.beta2 * state.v[name] + (1 - cfg.beta2) * g * g
        m_hat = state.m[name] / (1 - cfg.beta1**t)
        v_hat = state.v[name] / (1 - cfg.beta2**t)
        tensor = getattr(params, name)
        tensor -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)


def dev_accuracy(instances, params: ModelParams, ctx: FeatureContext) -> float:
    """Fraction of instances classified correctly at threshold 0.5.

    An instance predicts positive iff P > 0.5, so the no-evidence score of
    exactly 0.5 counts as a negative prediction.
    """
    if not instances:
        raise ConfigError("cannot evaluate accuracy on an empty instance list")
    correct = sum(
        1
        for inst in instances
        if (score_pair(inst, params, ctx).prob > 0.5) == inst.label
    )
    return correct / len(instances)


def _snapshot(params: ModelParams) -> ModelParams:
    return replace(
        params, **{n: getattr(params, n).copy() for n in params.tensors()}
    )


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    dev_accuracy: float


def train(
    params: ModelParams,
    train_instances,
    dev_instances,
    ctx: FeatureContext,
    cfg: TrainConfig,
) -> tuple[ModelParams, list[EpochRecord]]:
    """Train until the epoch budget or the early-stopping rule fires.

    Zero-path training instances carry no gradient signal and are dropped
    up front.  Stops once development accuracy has not improved by at
    least ``cfg.min_delta`` (absolute) within the last ``cfg.patience``
    epochs.  The logged loss is the mean per-instance training loss.
    """
    usable = [inst for inst in train_instances if inst.paths]
    if not usable:
        raise ConfigError("training set is empty (or has no instances with paths)")
    params = _snapshot(params)
    state = AdamState(params)
    log: list[EpochRecord] = []
    best_acc = -1.0
    best_params = _snapshot(params)
    stop_best = -np.inf
    last_significant = 1
    rng = np.random.default_rng(cfg.seed)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(usable))
        epoch_loss = 0.0
        for start in range(0, len(usable), cfg.batch_size):
            batch = [usable[i] for i in order[start : start + cfg.batch_size]]
            loss, grads = grad_batch(batch, params, ctx, lam=cfg.lam)
            adam_update(params, grads, state, cfg)
            epoch_loss += loss
        acc = dev_accuracy(dev_instances, params, ctx)
        log.append(EpochRecord(epoch, epoch_loss / len(usable), acc))
        if acc >= stop_best + cfg.min_delta or epoch == 1:
            last_significant = epoch
        stop_best = max(stop_best, acc)
        if acc > best_acc:
            best_acc = acc
            best_params = _snapshot(params)
        if epoch - last_significant >= cfg.patience:
            break
    return best_params, log


def write_log(log, out) -> None:
    """Training log TSV: ``epoch<TAB>loss<TAB>dev_accuracy``."""
    for rec in log:
        out.write(f"{rec.epoch}\t{rec.loss:.12g}\t{rec.dev_accuracy:.12g}\n")


def grid_search(
    ctx: FeatureContext,
    kind: str,
    train_instances,
    dev_instances,
    grid: GridSpec,
    base_cfg: TrainConfig,
    budget: int | None = None,
):
    """Train every grid cell with the shared seed and keep the best.

    Cells are ranked by best development accuracy; ties go to the earlier
    cell in enumeration order.  Returns ``(best_cell, best_params, log,
    results)`` where ``best_cell`` is ``(learning_rate, d, m)`` and
    ``results`` maps each evaluated cell to its accuracy.
    """
    results: dict[tuple, float] = {}
    best = None
    for i, (lr, d, m) in enumerate(grid.cells()):
        if budget is not None and i >= budget:
            break
        cfg = replace(base_cfg, learning_rate=lr)
        params = init_params(ctx, kind, d=d, m=m, lam=cfg.lam, seed=cfg.seed)
        trained, log = train(params, train_instances, dev_instances, ctx, cfg)
        acc = max(rec.dev_accuracy for rec in log)
        results[(lr, d, m)] = acc
        if best is None or acc > best[0]:
            best = (acc, (lr, d, m), trained, log)
    if best is None:
        raise ConfigError("grid search evaluated no cells")
    _, cell, trained, log = best
    return cell, trained, log, results
