"""Dual-objective loss: next-step correctness plus proficiency regression.

L = BCE(r_gt, r_pred) + alpha * sum over the four dimensions of
masked MSE(m_gt, m_pred). With alpha = 0 the result is exactly the BCE
term (no zero-valued addition is performed).
"""

from __future__ import annotations

import numpy as np

from .. import nn
from ..data.schema import DIMENSIONS


def composite_loss(r_gt, r_pred: nn.Tensor, mp_gt, mp_pred: nn.Tensor | None,
                   mp_mask, valid_mask, alpha: float) -> nn.Tensor:
    """Composite training objective over supervised positions.

    ``valid_mask`` selects positions with a real next step; each
    dimension's MSE is additionally masked by that dimension's presence
    bit at the target step.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    loss = nn.bce(r_gt, r_pred, valid_mask)
    if alpha == 0 or mp_pred is None:
        return loss
    valid = np.asarray(valid_mask)
    mp_mask = np.asarray(mp_mask)
    mp_gt = np.asarray(mp_gt)
    mp_total = None
    for i in range(len(DIMENSIONS)):
        term = nn.masked_mse(mp_gt[..., i], mp_pred[..., i], valid * mp_mask[..., i])
        mp_total = term if mp_total is None else nn.add(mp_total, term)
    return nn.add(loss, nn.mul(mp_total, alpha))
