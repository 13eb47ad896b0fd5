"""Confidence interval endpoints by inverting the profile ratio.

The set ``{theta : -2 log r(theta) <= -2 log c_n}`` is a closed interval
around the quantile estimate, so each endpoint is a single crossing on one
side of it.  ``brute_force_bounds`` recomputes the endpoints by enumerating
reweightings on a simplex grid and serves only as a check for tiny supports.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .npmle import DiscreteDistribution
from .smoothing import quantile_estimate
from .welr import neg2_log_welr


class DegenerateError(ValueError):
    """The estimate has a single atom, so there is no interval to speak of."""


@dataclass(frozen=True)
class ConfidenceInterval:
    x_l: float
    x_u: float
    q: float
    c_n: float
    smoothed: bool
    theta_hat: float
    alpha: float | None = None
    k: int | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def length(self) -> float:
        return self.x_u - self.x_l

    def __contains__(self, theta) -> bool:
        return self.x_l <= theta <= self.x_u


def feasible_range(dist: DiscreteDistribution, q: float, smoothed: bool = True) -> tuple:
    """Open range of probes where the scores straddle zero.

    Smoothed: ``H_1 > q`` and ``H_m < q``.  Without smoothing the range is
    ``[W_1, W_m)``.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    w = dist.support
    if w.size < 2:
        raise DegenerateError("single-atom distribution has no feasible range")
    if not smoothed:
        return float(w[0]), float(w[-1])
    return float(q * w[0]), float(w[-2] + q * (w[-1] - w[-2]))


def _neg2(dist, q, smoothed):
    def f(theta):
        return neg2_log_welr(dist, theta, q, smoothed).neg2logr
    return f


def _crossing(f, inner, outer, target, tol):
    """Endpoint between ``inner`` (f <= target) and ``outer`` (the boundary).

    Bisects until a finite point above ``target`` is found, then refines
    with Brent's method well past ``tol``.  Returns ``(theta, hit_boundary,
    evaluations)``.
    """
    evals = 0
    a, b = outer, inner
    found = False
    while abs(b - a) > tol:
        mid = 0.5 * (a + b)
        value = f(mid)
        evals += 1
        if value > target:
            a = mid
            if math.isfinite(value):
                found = True
                break
        else:
            b = mid
    if not found:
        return (outer, True, evals) if a == outer else (b, False, evals)
    scale = max(abs(a), abs(b))
    root, info = brentq(lambda t: f(t) - target, min(a, b), max(a, b),
                        xtol=1e-15 * scale, rtol=4 * np.finfo(float).eps,
                        full_output=True)
    return float(root), False, evals + info.function_calls


def welrci(dist: DiscreteDistribution, q: float, c_n: float, smoothed: bool = True,
           alpha: float | None = None, k: int | None = None) -> ConfidenceInterval:
    """Interval ``[X_L, X_U]`` of probes whose profile ratio is at least ``c_n``."""
    if not 0 < c_n <= 1:
        raise ValueError("c_n must lie in (0, 1]")
    theta_hat = quantile_estimate(dist, q, smoothed)
    lo, hi = feasible_range(dist, q, smoothed)
    target = -2.0 * math.log(c_n)
    diag = {"feasible_range": (lo, hi), "target": target}
    if not smoothed:
        return _welrci_steps(dist, q, c_n, theta_hat, target, diag, alpha, k)
    if target == 0.0:
        diag.update(left_boundary=False, right_boundary=False, evaluations=0)
        return ConfidenceInterval(theta_hat, theta_hat, q, c_n, smoothed, theta_hat, alpha, k, diag)

    f = _neg2(dist, q, smoothed)
    tol = 1e-8 * (dist.support[-1] - dist.support[0])
    x_l, left_edge, n_left = _crossing(f, theta_hat, lo, target, tol)
    x_u, right_edge, n_right = _crossing(f, theta_hat, hi, target, tol)
    if left_edge:
        x_l = lo
    if right_edge:
        x_u = hi
    diag.update(left_boundary=left_edge, right_boundary=right_edge,
                evaluations=n_left + n_right)
    return ConfidenceInterval(x_l, x_u, q, c_n, smoothed, theta_hat, alpha, k, diag)


def _welrci_steps(dist, q, c_n, theta_hat, target, diag, alpha, k):
    # without smoothing the ratio is constant on each [W_j, W_{j+1})
    w = dist.support
    values = np.array([neg2_log_welr(dist, t, q, False).neg2logr for t in w[:-1]])
    ok = np.flatnonzero(values <= target)
    diag.update(evaluations=len(values), left_boundary=False, right_boundary=False)
    if ok.size == 0:
        diag["empty"] = True
        return ConfidenceInterval(theta_hat, theta_hat, q, c_n, False, theta_hat, alpha, k, diag)
    j_lo, j_hi = int(ok[0]), int(ok[-1])
    diag["left_boundary"] = j_lo == 0
    diag["right_boundary"] = j_hi == len(values) - 1
    return ConfidenceInterval(float(w[j_lo]), float(w[j_hi + 1]), q, c_n, False,
                              theta_hat, alpha, k, diag)


def _compositions(total: int, parts: int) -> np.ndarray:
    # all vectors of `parts` positive integers summing to `total`
    cuts = np.array(list(itertools.combinations(range(1, total), parts - 1)), dtype=int)
    if parts == 1:
        return np.array([[total]])
    edges = np.hstack([np.zeros((len(cuts), 1), dtype=int), cuts,
                       np.full((len(cuts), 1), total, dtype=int)])
    return np.diff(edges, axis=1)


def brute_force_bounds(dist: DiscreteDistribution, q: float, c_n: float,
                       grid_step: float = 0.01, smoothed: bool = True) -> tuple:
    """Min and max smoothed quantile over simplex-grid reweightings with ratio >= c_n."""
    if dist.m > 4:
        raise ValueError("brute force is limited to supports of at most 4 points")
    if not 0 < grid_step <= 0.1:
        raise ValueError("grid_step must lie in (0, 0.1]")
    if not smoothed:
        raise ValueError("the enumeration oracle covers the smoothed interval only")
    total = int(round(1.0 / grid_step))
    p = _compositions(total, dist.m) / total
    log_ratio = dist.n * (np.log(p / dist.mass) @ dist.mass)
    keep = p[log_ratio >= math.log(c_n) - 1e-12]
    if keep.size == 0:
        theta = quantile_estimate(dist, q)
        return theta, theta
    knots = np.concatenate(([0.0], dist.support))
    cum = np.hstack([np.zeros((len(keep), 1)), np.cumsum(keep, axis=1)])
    cum[:, -1] = 1.0
    thetas = np.array([np.interp(q, c, knots) for c in cum])
    return float(thetas.min()), float(thetas.max())
