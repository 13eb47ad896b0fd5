"""Resampled NPMLEs shared by the calibration and the percentile baselines."""
from __future__ import annotations

import numpy as np

from ._rng import make_rng
from .censoring import CensoredSample
from .npmle import ConvergenceError, DiscreteDistribution, fit_npmle

# stream tags under the caller's seed
NOFN_STREAM = 0
MOFN_STREAM = 1


def resample_npmles(sample: CensoredSample, size: int, B: int, rng: np.random.Generator,
                    tol: float = 1e-3, max_iter: int = 10000, engine: str = "auto") -> list:
    """NPMLEs of ``B`` with-replacement resamples of ``size`` rows.

    Entries are ``None`` where the refit failed.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    rows = rng.integers(0, sample.n, size=(B, size))
    out: list[DiscreteDistribution | None] = []
    for r in rows:
        try:
            out.append(fit_npmle(sample.take(r), tol, max_iter, engine)[0])
        except (ConvergenceError, ValueError):
            out.append(None)
    return out


class ResampleCache:
    """Memoized resampled NPMLEs per resample size.

    Size ``n`` draws from stream ``(seed, 0)`` and any other size ``b`` from
    ``(seed, 1, b)``, so results never depend on which sizes were asked for
    first.
    """

    def __init__(self, sample: CensoredSample, B: int, seed: int,
                 tol: float = 1e-3, max_iter: int = 10000, stream: tuple = (),
                 engine: str = "auto"):
        self.sample = sample
        self.B = int(B)
        self.seed = seed
        self.tol = tol
        self.max_iter = max_iter
        self.stream = tuple(stream)
        self.engine = engine
        self._fits: dict[int, list] = {}

    def get(self, size: int | None = None) -> list:
        size = self.sample.n if size is None else int(size)
        if size not in self._fits:
            if size == self.sample.n:
                rng = make_rng(self.seed, *self.stream, NOFN_STREAM)
            else:
                rng = make_rng(self.seed, *self.stream, MOFN_STREAM, size)
            self._fits[size] = resample_npmles(self.sample, size, self.B, rng,
                                               self.tol, self.max_iter, self.engine)
        return self._fits[size]
