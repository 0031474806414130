"""Least-squares fits of log(gap) against log(k)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_POINTS = 5


@dataclass(frozen=True)
class SlopeFit:
    k_lo: int
    k_hi: int
    slope: float
    r_squared: float
    n_points: int


def fit_slope(trace, k_lo: int, k_hi: int, floor: float = 0.0) -> SlopeFit:
    """Fit over rows with ``k_lo <= k <= k_hi`` and ``gap > floor``.

    ``trace`` is a :class:`~optensor.outer.RunTrace` or a ``(k, gap)`` pair of arrays.
    """
    if not k_hi > k_lo >= 1:
        raise ValueError(f"need k_hi > k_lo >= 1, got [{k_lo}, {k_hi}]")
    if isinstance(trace, tuple):
        k, gap = (np.asarray(a, dtype=float) for a in trace)
    else:
        k, gap = trace.column("k"), trace.gaps
    mask = (k >= k_lo) & (k <= k_hi) & np.isfinite(gap) & (gap > floor)
    n = int(mask.sum())
    if n < MIN_POINTS:
        raise ValueError(f"only {n} usable points in [{k_lo}, {k_hi}] above floor {floor:g}; "
                         f"need {MIN_POINTS}")
    lx, ly = np.log(k[mask]), np.log(gap[mask])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(int(k_lo), int(k_hi), float(slope), r2, n)
