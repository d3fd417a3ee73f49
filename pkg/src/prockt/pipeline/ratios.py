"""Turning verdicts into per-dimension proficiency ratios."""

from __future__ import annotations

from ..data.schema import DIMENSIONS, MPRatios
from .types import IncompleteVerdictError, IndicatorSet


def compute_mp_ratios(indicators: IndicatorSet, verdicts: dict[str, int]) -> MPRatios:
    """Per dimension: satisfied indicators over generated indicators.

    Dimensions with no indicators are marked absent. Requires a complete
    verdict map over the indicator set.
    """
    missing = [c for c in indicators.codes() if c not in verdicts]
    if missing:
        raise IncompleteVerdictError(missing)
    by_cat = indicators.by_category()
    counts = {}
    for d in DIMENSIONS:
        total = len(by_cat[d])
        if total == 0:
            continue
        satisfied = sum(verdicts[ind.code] for ind in by_cat[d])
        counts[d] = (satisfied, total)
    return MPRatios.from_counts(counts)
