"""Bootstrap percentile intervals for the raw (QBPCI) and smoothed (SQBPCI) quantile."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import order_statistic
from .bootstrap import ResampleCache
from .censoring import CensoredSample
from .intervals import DegenerateError
from .smoothing import quantile_estimate


@dataclass(frozen=True)
class PercentileCI:
    lo: float
    hi: float
    method: str
    B: int
    degenerate: int = 0

    @property
    def length(self) -> float:
        return self.hi - self.lo


def bootstrap_percentile_ci(sample: CensoredSample, q: float, alpha: float, B: int = 400,
                            seed: int = 0, smoothed: bool = True, tol: float = 1e-3,
                            max_iter: int = 10000,
                            cache: ResampleCache | None = None,
                            engine: str = "auto") -> PercentileCI:
    """``(alpha/2, 1 - alpha/2)`` percentiles of the resampled quantile estimates."""
    if not 0 < q < 1 or not 0 < alpha < 1:
        raise ValueError("q and alpha must lie in (0, 1)")
    if B < 2:
        raise ValueError("B must be at least 2")
    if cache is None:
        cache = ResampleCache(sample, B, seed, tol, max_iter, engine=engine)
    fits = cache.get(sample.n)
    stats = np.array([np.nan if d is None else quantile_estimate(d, q, smoothed) for d in fits])
    bad = int(np.isnan(stats).sum())
    if bad == stats.size:
        raise DegenerateError("every bootstrap replicate is degenerate")
    lo = order_statistic(stats, alpha / 2)
    hi = order_statistic(stats, 1 - alpha / 2)
    return PercentileCI(lo, hi, "SQBPCI" if smoothed else "QBPCI", len(fits), bad)
