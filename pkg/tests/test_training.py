"""Adam updates, the early-stopping rule, and grid search."""

import io
import math

import numpy as np
import pytest

import pathreason.training as training
from pathreason import (
    AdamState,
    ConfigError,
    EpochRecord,
    GridSpec,
    QueryInstance,
    TrainConfig,
    adam_update,
    dev_accuracy,
    grad_batch,
    grid_search,
    init_params,
    save_checkpoint,
    score_pair,
    train,
    write_log,
)

from engine_fixtures import build_random_instances, make_context, random_graph


def _setup(kind="A", seed=0, graph_seed=21, n_train=20, n_dev=10):
    rng = np.random.default_rng(graph_seed)
    kg = random_graph(rng, n_entities=15, n_relations=3, n_edges=60)
    ctx = make_context(kg, dim=6, seed=0)
    params = init_params(ctx, kind, d=6, m=3, seed=seed)
    train_set = build_random_instances(ctx, rng, n_train)
    dev_set = build_random_instances(ctx, rng, n_dev, require_paths=False)
    return ctx, params, train_set, dev_set


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(patience=0)


def test_adam_zero_gradient_leaves_parameters_unchanged():
    ctx, params, _, _ = _setup()
    state = AdamState(params)
    before = {n: getattr(params, n).copy() for n in params.trainable_names()}
    zeros = {n: np.zeros_like(getattr(params, n)) for n in params.trainable_names()}
    adam_update(params, zeros, state, TrainConfig())
    for n in params.trainable_names():
        np.testing.assert_array_equal(getattr(params, n), before[n])


def test_adam_first_step_approximates_signed_learning_rate():
    ctx, params, _, _ = _setup()
    state = AdamState(params)
    cfg = TrainConfig(learning_rate=1e-3)
    g = np.full_like(params.T, 0.5)
    before = params.T.copy()
    grads = {n: np.zeros_like(getattr(params, n)) for n in params.trainable_names()}
    grads["T"] = g
    adam_update(params, grads, state, cfg)
    np.testing.assert_allclose(before - params.T, cfg.learning_rate * np.sign(g),
                               rtol=1e-4)


def test_adam_two_steps_match_scalar_oracle():
    # Minimize f(x) = x^2 starting at x=3; hand-rolled bias-corrected Adam.
    cfg = TrainConfig(learning_rate=0.1)
    x = 3.0
    m = v = 0.0
    expected = []
    for t in (1, 2):
        g = 2.0 * x
        m = cfg.beta1 * m + (1 - cfg.beta1) * g
        v = cfg.beta2 * v + (1 - cfg.beta2) * g * g
        m_hat = m / (1 - cfg.beta1**t)
        v_hat = v / (1 - cfg.beta2**t)
        x = x - cfg.learning_rate * m_hat / (math.sqrt(v_hat) + cfg.eps)
        expected.append(x)

    ctx, params, _, _ = _setup(kind="B")
    params.bp[:] = 0.0
    params.bp[0] = 3.0
    state = AdamState(params)
    got = []
    for _ in range(2):
        grads = {n: np.zeros_like(getattr(params, n)) for n in params.trainable_names()}
        grads["bp"] = 2.0 * params.bp * (np.arange(params.bp.size) == 0)
        adam_update(params, grads, state, cfg)
        got.append(float(params.bp[0]))
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_accuracy_threshold_is_strict():
    ctx, params, _, dev = _setup()
    # A zero-path instance scores exactly 0.5 and must count as a negative
    # prediction.
    zero_neg = QueryInstance(0, 1, ctx.kg.base_relations()[0], label=False, paths=[])
    zero_pos = QueryInstance(0, 1, ctx.kg.base_relations()[0], label=True, paths=[])
    assert dev_accuracy([zero_neg], params, ctx) == 1.0
    assert dev_accuracy([zero_pos], params, ctx) == 0.0


def test_empty_training_set_raises():
    ctx, params, _, dev = _setup()
    with pytest.raises(ConfigError):
        train(params, [], dev, ctx, TrainConfig())
    zero_path = [QueryInstance(0, 1, ctx.kg.base_relations()[0], True, [])]
    with pytest.raises(ConfigError):
        train(params, zero_path, dev, ctx, TrainConfig())


def test_flat_dev_accuracy_halts_after_patience(monkeypatch):
    ctx, params, train_set, dev = _setup()
    monkeypatch.setattr(training, "dev_accuracy", lambda *a, **k: 0.5)
    cfg = TrainConfig(epochs=100, patience=10, seed=0)
    _, log = train(params, train_set, dev, ctx, cfg)
    assert len(log) == 11  # best epoch 1 plus exactly `patience` flat epochs


def test_training_respects_epoch_budget():
    ctx, params, train_set, dev = _setup()
    cfg = TrainConfig(epochs=3, patience=10, seed=0)
    _, log = train(params, train_set, dev, ctx, cfg)
    assert len(log) == 3
    assert [r.epoch for r in log] == [1, 2, 3]


def test_best_checkpoint_has_best_dev_accuracy():
    ctx, params, train_set, dev = _setup()
    cfg = TrainConfig(epochs=8, patience=8, seed=0)
    best, log = train(params, train_set, dev, ctx, cfg)
    assert dev_accuracy(dev, best, ctx) == max(r.dev_accuracy for r in log)


def test_training_is_bitwise_reproducible(tmp_path):
    ctx, params, train_set, dev = _setup()
    cfg = TrainConfig(epochs=4, patience=4, seed=7)
    a, log_a = train(params, train_set, dev, ctx, cfg)
    b, log_b = train(params, train_set, dev, ctx, cfg)
    fa, fb = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    save_checkpoint(a, str(fa))
    save_checkpoint(b, str(fb))
    assert fa.read_bytes() == fb.read_bytes()
    assert log_a == log_b


def test_first_epoch_reduces_loss_on_learnable_data():
    # Median over 5 seeds: epoch-1 training loss beats the starting loss.
    wins = 0
    for seed in range(5):
        ctx, params, train_set, dev = _setup(seed=seed, graph_seed=30 + seed)
        start_loss, _ = grad_batch(
            [i for i in train_set if i.paths], params, ctx, lam=0.0
        )
        cfg = TrainConfig(epochs=2, patience=5, seed=seed, lam=0.0)
        _, log = train(params, train_set, dev, ctx, cfg)
        usable = len([i for i in train_set if i.paths])
        if log[0].loss < start_loss / usable:
            wins += 1
    assert wins >= 3


def test_log_serialization_format():
    buf = io.StringIO()
    write_log([EpochRecord(1, 0.6931, 0.5), EpochRecord(2, 0.5, 0.75)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "1\t0.6931\t0.5"
    assert lines[1] == "2\t0.5\t0.75"


def test_grid_of_one_returns_it():
    ctx, params, train_set, dev = _setup()
    grid = GridSpec(learning_rates=(1e-3,), dims=(6,), type_dims=(3,))
    cfg = TrainConfig(epochs=2, patience=5, seed=0)
    cell, trained, log, results = grid_search(ctx, "A", train_set, dev, grid, cfg)
    assert cell == (1e-3, 6, 3)
    assert len(results) == 1


def test_grid_enumeration_is_learning_rate_major():
    grid = GridSpec(learning_rates=(0.1, 0.2), dims=(4, 8), type_dims=(2,))
    assert list(grid.cells()) == [
        (0.1, 4, 2), (0.1, 8, 2), (0.2, 4, 2), (0.2, 8, 2)
    ]


def test_grid_best_replays_its_logged_accuracy():
    ctx, params, train_set, dev = _setup()
    grid = GridSpec(learning_rates=(1e-3, 3e-3), dims=(6,), type_dims=(3,))
    cfg = TrainConfig(epochs=3, patience=5, seed=0)
    cell, trained, log, results = grid_search(ctx, "A", train_set, dev, grid, cfg)
    lr, d, m = cell
    replay_params = init_params(ctx, "A", d=d, m=m, lam=cfg.lam, seed=cfg.seed)
    import dataclasses

    _, replay_log = train(
        replay_params, train_set, dev, ctx, dataclasses.replace(cfg, learning_rate=lr)
    )
    assert max(r.dev_accuracy for r in replay_log) == results[cell]
