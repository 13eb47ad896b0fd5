"""Piecewise-linear smoothing of a discrete d.f. and the moment functionals.

The smoothed d.f. joins ``(0, 0)``, ``(W_1, F(W_1))``, ..., ``(W_m, 1)`` by
straight lines, i.e. ``sum_i p_i H_i(W, x)`` where ``H_i`` ramps from 0 at
``W_{i-1}`` to 1 at ``W_i`` (with ``W_0 = 0``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .npmle import DiscreteDistribution

MAX_MOMENT = 6


def _knots(support) -> np.ndarray:
    return np.concatenate(([0.0], np.asarray(support, dtype=float)))


def h_weights(support, x) -> np.ndarray:
    """All ramps ``H_1(W, x), ..., H_m(W, x)`` at a scalar ``x``."""
    w = _knots(support)
    lo, hi = w[:-1], w[1:]
    width = hi - lo
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = np.where(width > 0, (x - lo) / width, 1.0)
    return np.where(x <= lo, 0.0, np.where(x > hi, 1.0, np.minimum(ramp, 1.0)))


def h_weight(support, i: int, x: float) -> float:
    """Ramp ``H_i(W, x)`` for 1-based ``i``; ``support`` excludes ``W_0 = 0``."""
    m = len(support)
    if not 1 <= i <= m:
        raise IndexError(f"i must be in 1..{m}")
    return float(h_weights(support, x)[i - 1])


def smoothed_cdf(dist: DiscreteDistribution, x):
    """Smoothed d.f. at ``x`` (scalar or array); 0 below 0 and 1 above ``W_m``."""
    knots = _knots(dist.support)
    values = np.concatenate(([0.0], dist.cumulative))
    return np.interp(x, knots, values, left=0.0, right=1.0)


def smoothed_quantile(dist: DiscreteDistribution, q: float) -> float:
    """Exact inverse of the piecewise-linear smoothed d.f."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    knots = _knots(dist.support)
    values = np.concatenate(([0.0], dist.cumulative))
    return float(np.interp(q, values, knots))


def centered_scores(dist: DiscreteDistribution, theta: float, q: float,
                    smoothed: bool = True) -> np.ndarray:
    """``U_i = H_i(W, theta) - q``, or ``1{W_i <= theta} - q`` without smoothing."""
    if smoothed:
        return h_weights(dist.support, theta) - q
    return (dist.support <= theta).astype(float) - q


@dataclass(frozen=True)
class MomentSet:
    theta: float
    q: float
    eta_hat: float
    mu: dict
    smoothed: bool = True

    @property
    def mu2(self) -> float:
        return self.mu[2]


def moments(dist: DiscreteDistribution, theta: float, q: float,
            smoothed: bool = True) -> MomentSet:
    """``eta_hat = q + sum p_i U_i`` and ``mu_k = sum p_i U_i**k`` for k = 2..6."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    u = centered_scores(dist, theta, q, smoothed)
    p = dist.mass
    powers = np.vander(u, MAX_MOMENT + 1, increasing=True)
    mom = p @ powers
    return MomentSet(
        theta=float(theta),
        q=float(q),
        eta_hat=float(q + mom[1]),
        mu={k: float(mom[k]) for k in range(2, MAX_MOMENT + 1)},
        smoothed=smoothed,
    )


def quantile_estimate(dist: DiscreteDistribution, q: float, smoothed: bool = True) -> float:
    """Smoothed quantile, or the raw right-continuous inverse."""
    return smoothed_quantile(dist, q) if smoothed else dist.quantile(q)
