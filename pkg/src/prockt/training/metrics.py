"""Evaluation metrics over supervised positions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..data.batches import Batch
from ..data.schema import DIMENSIONS
from ..models.base import KTModel


@dataclass
class Metrics:
    auc: float
    acc: float
    n_predictions: int
    mp_mse: dict[str, float] | None = None

    def to_json(self) -> dict:
        doc = {"auc": self.auc, "acc": self.acc, "n_predictions": self.n_predictions}
        if self.mp_mse is not None:
            doc["mp_mse"] = dict(self.mp_mse)
        return doc


def auc(labels, scores) -> float:
    """Rank-statistic AUC with tie averaging.

    Equals P(score_pos > score_neg) + 0.5 * P(tie). Returns NaN for
    single-class input (undefined).
    """
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=float)
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(s, method="average")
    pos_rank_sum = ranks[y == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def acc(labels, scores, threshold: float = 0.5) -> float:
    """Thresholded accuracy; a score exactly at the threshold counts as positive."""
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=float)
    if y.size == 0:
        raise ValueError("acc needs at least one prediction")
    return float(np.mean((s >= threshold) == (y == 1)))


def gather_predictions(model: KTModel, batches: list[Batch]
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Flatten supervised positions across batches.

    Returns (labels, scores, mp_targets, mp_preds, mp_masks); the MP
    arrays are empty for original-variant models.
    """
    labels, scores = [], []
    mp_t, mp_p, mp_m = [], [], []
    for batch in batches:
        preds = model.forward(batch, training=False)
        mask = batch.target_mask.astype(bool)
        labels.append(batch.targets_correct[mask])
        scores.append(preds.r_pred.data[mask])
        if preds.mp_pred is not None:
            mp_t.append(batch.targets_mp[mask])
            mp_p.append(preds.mp_pred.data[mask])
            mp_m.append(batch.target_mp_mask[mask])
    cat = lambda parts, width: (np.concatenate(parts) if parts
                                else np.zeros((0, width) if width else 0))
    return (cat(labels, 0), cat(scores, 0), cat(mp_t, 4), cat(mp_p, 4), cat(mp_m, 4))


def evaluate(model: KTModel, batches: list[Batch]) -> Metrics:
    labels, scores, mp_t, mp_p, mp_m = gather_predictions(model, batches)
    mp_mse = None
    if mp_p.size:
        mp_mse = {}
        for i, d in enumerate(DIMENSIONS):
            m = mp_m[:, i] > 0
            mp_mse[d] = float(np.mean((mp_t[m, i] - mp_p[m, i]) ** 2)) if m.any() else 0.0
    return Metrics(auc=auc(labels, scores), acc=acc(labels, scores),
                   n_predictions=int(labels.size), mp_mse=mp_mse)
