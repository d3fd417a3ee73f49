"""Finite-difference verification suite for the autodiff engine.

Checks every registered op on randomized small tensors, then the full
composite-loss gradient of both backbones on a toy batch. Used by the
``gradcheck`` CLI command and the acceptance tests.
"""

from __future__ import annotations

import numpy as np

from . import nn
from .data.batches import Batch
from .models import ModelConfig, build_model
from .training.loss import composite_loss

REL_TOL = 1e-4


def _rand(rng, *shape):
    return nn.Tensor(rng.normal(0.0, 1.0, size=shape), requires_grad=True)


def op_cases(seed: int):
    """(name, loss_fn, params) triples; every loss_fn reduces to a scalar."""
    rng = np.random.default_rng(seed)
    a23 = _rand(rng, 2, 3)
    b23 = _rand(rng, 2, 3)
    m34 = _rand(rng, 3, 4)
    table = _rand(rng, 5, 3)
    idx = rng.integers(0, 5, size=(2, 4))
    mask = (rng.random((2, 3)) < 0.6).astype(float)
    probs_logit = _rand(rng, 2, 3)
    labels = (rng.random((2, 3)) < 0.5).astype(float)
    targets = rng.random((2, 3))
    drop_mask = (rng.random((2, 3)) < 0.5) / 0.5  # fixed mask stands in for dropout

    def reduce(x):
        return nn.sum_(nn.mul(x, x))

    return [
        ("add", lambda: reduce(nn.add(a23, b23)), [a23, b23]),
        ("add_broadcast", lambda: reduce(nn.add(a23, m34[:, 0])), [a23, m34]),
        ("mul", lambda: reduce(nn.mul(a23, b23)), [a23, b23]),
        ("matmul", lambda: reduce(nn.matmul(a23, m34)), [a23, m34]),
        ("concat", lambda: reduce(nn.concat([a23, b23], axis=1)), [a23, b23]),
        ("slice", lambda: reduce(a23[:, 1:3]), [a23]),
        ("embedding_lookup", lambda: reduce(nn.embedding_lookup(table, idx)), [table]),
        ("sigmoid", lambda: reduce(nn.sigmoid(a23)), [a23]),
        ("tanh", lambda: reduce(nn.tanh(a23)), [a23]),
        ("softmax", lambda: reduce(nn.softmax(a23)), [a23]),
        ("dropout_mask", lambda: reduce(nn.mul(a23, drop_mask)), [a23]),
        ("masked_mean", lambda: nn.masked_mean(nn.mul(a23, a23), mask), [a23]),
        ("power", lambda: nn.sum_(nn.power(nn.add(nn.mul(a23, a23), 0.5), -0.5)), [a23]),
        ("log", lambda: nn.sum_(nn.log(nn.add(nn.mul(a23, a23), 0.5))), [a23]),
        ("exp", lambda: reduce(nn.exp(a23)), [a23]),
        ("relu", lambda: reduce(nn.relu(nn.add(a23, 0.05))), [a23]),
        ("bce", lambda: nn.bce(labels, nn.sigmoid(probs_logit), mask), [probs_logit]),
        ("masked_mse", lambda: nn.masked_mse(targets, nn.sigmoid(probs_logit), mask),
         [probs_logit]),
    ]


def check_ops(seeds=range(100)) -> dict[str, float]:
    """Max relative finite-difference error per op across seeds."""
    worst: dict[str, float] = {}
    for seed in seeds:
        for name, fn, params in op_cases(seed):
            err = nn.check_gradients(fn, params)
            worst[name] = max(worst.get(name, 0.0), err)
    return worst


def toy_batch(seed: int = 0, num_students: int = 2, steps: int = 8,
              num_questions: int = 6, num_concepts: int = 4) -> Batch:
    rng = np.random.default_rng(seed)
    B, T = num_students, steps
    valid = np.ones((B, T))
    mp_vals = rng.random((B, T, 4))
    mp_mask = (rng.random((B, T, 4)) < 0.8).astype(float)
    tgt_mp = np.zeros((B, T, 4))
    tgt_mp_mask = np.zeros((B, T, 4))
    tgt_mp[:, :-1] = mp_vals[:, 1:]
    tgt_mp_mask[:, :-1] = mp_mask[:, 1:]
    correctness = rng.integers(0, 2, size=(B, T))
    tgt_r = np.zeros((B, T))
    tgt_r[:, :-1] = correctness[:, 1:]
    return Batch(
        question_ids=rng.integers(1, num_questions + 1, size=(B, T)),
        concept_ids=rng.integers(1, num_concepts + 1, size=(B, T)),
        correctness=correctness,
        mp_inputs=np.concatenate([mp_vals, mp_mask], axis=-1),
        targets_correct=tgt_r, targets_mp=tgt_mp, target_mp_mask=tgt_mp_mask,
        valid_mask=valid)


def check_model_loss(backbone: str, variant: str = "statuskt", alpha: float = 0.5,
                     embed_dim: int = 8, seed: int = 0) -> float:
    """Finite-difference check of the full loss gradient for one backbone."""
    batch = toy_batch(seed)
    config = ModelConfig(backbone=backbone, variant=variant,
                         num_questions=6, num_concepts=4, max_len=8,
                         embed_dim=embed_dim, dropout=0.0,
                         attention_heads=2, seed=seed)
    model = build_model(config)

    def loss_fn():
        preds = model.forward(batch, training=False)
        return composite_loss(batch.targets_correct, preds.r_pred,
                              batch.targets_mp, preds.mp_pred,
                              batch.target_mp_mask, batch.target_mask, alpha)

    return nn.check_gradients(loss_fn, list(model.parameters().values()))


def run_suite(op_seeds=range(20), verbose: bool = False) -> tuple[bool, list[str]]:
    """Run the whole suite; returns (passed, report lines)."""
    lines = []
    ok = True
    for name, err in check_ops(op_seeds).items():
        passed = err < REL_TOL
        ok &= passed
        lines.append(f"op {name}: max rel err {err:.2e} [{'ok' if passed else 'FAIL'}]")
    for backbone in ("recurrent", "attention"):
        err = check_model_loss(backbone)
        passed = err < REL_TOL
        ok &= passed
        lines.append(f"model {backbone} composite loss: max rel err {err:.2e} "
                     f"[{'ok' if passed else 'FAIL'}]")
    return ok, lines
