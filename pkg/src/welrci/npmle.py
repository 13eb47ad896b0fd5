"""Adjusted NPMLE of the lifetime d.f. as a discrete distribution.

Right-censored data go through the product-limit formula, current-status
data through pool-adjacent-violators, everything else through Turnbull's
self-consistency (EM) iteration on the interval reduction.  Every engine
finishes with the same proper-d.f. adjustment: whatever mass is left over
sits at the largest observed value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import isotonic_regression

from .censoring import CensoredSample, IntervalArray, Scheme, to_intervals

MASS_FLOOR = 1e-10


class ConvergenceError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class DiscreteDistribution:
    """Support ``W_1 < ... < W_m`` with positive masses summing to one.

    ``n`` is the size of the sample the estimate came from; it scales the
    weighted empirical likelihood.
    """

    support: np.ndarray
    mass: np.ndarray
    n: int

    def __post_init__(self):
        w = np.asarray(self.support, dtype=float)
        p = np.asarray(self.mass, dtype=float)
        if w.ndim != 1 or w.shape != p.shape or w.size < 1:
            raise ValueError("support and mass must be nonempty 1-d arrays of equal length")
        if np.any(np.diff(w) <= 0) or not np.all(np.isfinite(w)) or w[0] < 0:
            raise ValueError("support must be finite, nonnegative and strictly increasing")
        if np.any(p <= 0):
            raise ValueError("masses must be strictly positive")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {p.sum()!r}, not 1")
        if int(self.n) < 1:
            raise ValueError("n must be positive")
        object.__setattr__(self, "support", w)
        object.__setattr__(self, "mass", p)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_points(cls, points, masses, n, floor: float = MASS_FLOOR) -> "DiscreteDistribution":
        """Merge tied points, drop masses below ``floor`` and renormalize."""
        points = np.asarray(points, dtype=float)
        masses = np.asarray(masses, dtype=float)
        w, inv = np.unique(points, return_inverse=True)
        p = np.bincount(inv.ravel(), weights=masses, minlength=w.size)
        keep = p >= floor
        if not keep.any():
            raise ValueError("no mass above the floor")
        w, p = w[keep], p[keep]
        return cls(w, p / p.sum(), n)

    @property
    def m(self) -> int:
        return self.support.size

    @property
    def cumulative(self) -> np.ndarray:
        c = np.cumsum(self.mass)
        c[-1] = 1.0
        return c

    def cdf(self, x):
        """Step d.f. ``sum p_i 1{W_i <= x}``."""
        idx = np.searchsorted(self.support, x, side="right")
        c = np.concatenate(([0.0], self.cumulative))
        return c[idx]

    def quantile(self, q: float) -> float:
        """Right-continuous inverse ``min{W_i : F(W_i) >= q}``."""
        if not 0 < q < 1:
            raise ValueError("q must lie in (0, 1)")
        i = int(np.searchsorted(self.cumulative, q - 1e-12, side="left"))
        return float(self.support[min(i, self.m - 1)])

    def to_csv(self) -> str:
        lines = ["w,p"] + [f"{float(w)!r},{float(p)!r}" for w, p in zip(self.support, self.mass)]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"n": self.n, "w": self.support.tolist(), "p": self.mass.tolist()}


@dataclass(frozen=True)
class EmReport:
    iterations: int
    final_sup_change: float
    converged: bool


_CLOSED_FORM = EmReport(0, 0.0, True)


def kaplan_meier(sample: CensoredSample) -> DiscreteDistribution:
    """Product-limit estimate; leftover survival goes to the largest observation.

    At tied times deaths are counted before censorings.
    """
    if sample.scheme is not Scheme.RIGHT or sample.unified:
        raise ValueError("kaplan_meier needs a right-censored (v, delta) sample")
    v = sample["v"]
    d = sample["delta"]
    n = v.size
    if n == 0:
        raise ValueError("empty sample")
    times, inv = np.unique(v, return_inverse=True)
    events = np.bincount(inv, weights=d, minlength=times.size)
    counts = np.bincount(inv, minlength=times.size)
    at_risk = n - np.concatenate(([0], np.cumsum(counts)[:-1]))
    surv = np.cumprod(1.0 - events / at_risk)
    mass = -np.diff(np.concatenate(([1.0], surv)))
    points = times[events > 0]
    masses = mass[events > 0]
    residual = surv[-1]
    if residual > 0:
        points = np.append(points, times[-1])
        masses = np.append(masses, residual)
    return DiscreteDistribution.from_points(points, np.clip(masses, 0, None), n)


def pava(values, weights=None) -> np.ndarray:
    """Weighted nondecreasing isotonic regression (pool-adjacent-violators)."""
    y = np.asarray(values, dtype=float)
    return isotonic_regression(y, weights=weights, increasing=True).x


def pava_current_status(sample: CensoredSample) -> DiscreteDistribution:
    """Current-status NPMLE: isotonic fit of ``delta`` on sorted examination times."""
    if sample.scheme is not Scheme.INTERVAL1 or sample.unified:
        raise ValueError("pava_current_status needs an interval1 (y, delta) sample")
    y = sample["y"]
    d = sample["delta"]
    if y.size == 0:
        raise ValueError("empty sample")
    times, inv = np.unique(y, return_inverse=True)
    counts = np.bincount(inv, minlength=times.size).astype(float)
    hits = np.bincount(inv, weights=d, minlength=times.size)
    fit = pava(hits / counts, counts)
    mass = np.diff(np.concatenate(([0.0], fit)))
    mass[-1] += 1.0 - fit[-1]
    return DiscreteDistribution.from_points(times, np.clip(mass, 0, None), y.size)


def _innermost(left, right, exact):
    """Representative points of Turnbull's innermost intervals.

    Endpoints are ordered so that at a common value a closed left end (exact
    point) precedes a right end, which precedes an open left end.  Each left
    end immediately followed by a right end bounds an innermost interval,
    represented by that right end (possibly ``inf``).
    """
    closed = exact
    vals = np.concatenate((left, right))
    kinds = np.concatenate((np.where(closed, 0, 2), np.ones(right.size, dtype=int)))
    order = np.lexsort((kinds, vals))
    vals, kinds = vals[order], kinds[order]
    is_left = kinds != 1
    starts = np.flatnonzero(is_left[:-1] & ~is_left[1:])
    return np.unique(vals[starts + 1])


def turnbull_em(intervals, tol: float = 1e-3, max_iter: int = 10000, n: int | None = None,
                debug: bool = False):
    """Self-consistency iteration for the NPMLE from censoring intervals.

    Returns ``(distribution, report)``.  Iteration stops once the sup-norm
    change of the d.f. over the candidate points drops below ``tol``; mass on
    an unbounded innermost interval is moved to the largest finite endpoint.
    With ``debug`` the observed-data log-likelihood is checked to be
    nondecreasing at every step.
    """
    if not isinstance(intervals, IntervalArray):
        intervals = IntervalArray.from_records(intervals)
    if len(intervals) == 0:
        raise ValueError("empty interval list")
    if not tol > 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter >= 1")
    n_obs = len(intervals) if n is None else n

    rows = np.stack([intervals.left, intervals.right, intervals.exact.astype(float)], axis=1)
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    left, right, exact = uniq[:, 0], uniq[:, 1], uniq[:, 2].astype(bool)
    weights = counts / counts.sum()

    reps = _innermost(left, right, exact)
    member = np.where(
        exact[:, None],
        reps[None, :] == left[:, None],
        (reps[None, :] > left[:, None]) & (reps[None, :] <= right[:, None]),
    ).astype(float)
    if np.any(member.sum(axis=1) == 0):
        raise ValueError("an observation contains no candidate support point")

    # start from each observation spreading its weight evenly over its points
    p = (member / member.sum(axis=1, keepdims=True)).T @ weights
    loglik = -np.inf
    change = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        denom = member @ p
        if debug:
            current = float(weights @ np.log(denom))
            assert current >= loglik - 1e-12, "EM log-likelihood decreased"
            loglik = current
        p_new = p * (member.T @ (weights / denom))
        change = float(np.max(np.abs(np.cumsum(p_new) - np.cumsum(p))))
        p = p_new
        if change < tol:
            break
    report = EmReport(it, change, change < tol)
    if not report.converged:
        raise ConvergenceError(f"EM did not converge in {max_iter} iterations", report)

    finite = np.concatenate((left, right[np.isfinite(right)]))
    points = np.where(np.isinf(reps), finite.max(), reps)
    return DiscreteDistribution.from_points(points, p, n_obs), report


def empirical(x, n: int | None = None) -> DiscreteDistribution:
    x = np.asarray(x, dtype=float)
    return DiscreteDistribution.from_points(x, np.full(x.size, 1.0 / x.size), n or x.size)


ENGINES = ("auto", "em")


def fit_npmle(sample: CensoredSample, tol: float = 1e-3, max_iter: int = 10000,
              engine: str = "auto"):
    """Dispatch to the right engine; returns ``(distribution, report)``.

    ``engine="auto"`` uses the closed forms (product-limit for right
    censoring, PAVA for current status, plain empirical without censoring)
    and EM for the rest.  ``engine="em"`` runs the EM on the interval
    reduction for every censored scheme; the ``table5`` preset uses it
    with the 0.001 stop to match the reference current-status runs.
    """
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    if not sample.unified:
        if sample.scheme is Scheme.NONE:
            return empirical(sample["x"]), _CLOSED_FORM
        if engine == "auto" and sample.scheme is Scheme.RIGHT:
            return kaplan_meier(sample), _CLOSED_FORM
        if engine == "auto" and sample.scheme is Scheme.INTERVAL1:
            return pava_current_status(sample), _CLOSED_FORM
    return turnbull_em(to_intervals(sample), tol=tol, max_iter=max_iter, n=sample.n)
