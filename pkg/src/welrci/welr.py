"""Weighted empirical log-likelihood ratio for a quantile and its expansion.

For a probe ``theta`` the profile ratio is maximized over reweightings
``p_i = p_hat_i / (1 + lam * U_i)`` where ``lam`` solves
``g(lam) = sum p_hat_i U_i / (1 + lam U_i) = 0``; then
``-2 log r(theta) = 2 n sum p_hat_i log(1 + lam U_i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .npmle import DiscreteDistribution
from .smoothing import MomentSet, centered_scores

BRACKET_SHRINK = 1e-12
G_TOL = 1e-12
WIDTH_TOL = 1e-14


class InfeasibleError(ValueError):
    """The scores do not straddle zero, so no reweighting meets the constraint."""


@dataclass(frozen=True)
class WelrEvaluation:
    theta: float
    lambda0: float
    neg2logr: float
    feasible: bool
    bracket: tuple


@dataclass(frozen=True)
class ExpansionCoefficients:
    a1: float
    a2: float
    a3: float
    a4: float

    def as_tuple(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4)


def lambda_bracket(u) -> tuple:
    u = np.asarray(u, dtype=float)
    umin, umax = float(u.min()), float(u.max())
    if not umin < 0 < umax:
        raise InfeasibleError("scores must take both signs")
    return (-1.0 / umax, -1.0 / umin)


def solve_lambda(p_hat, u) -> float:
    """Root of the decreasing function ``g`` inside ``(-1/max U, -1/min U)``.

    Newton steps from zero, falling back to bisection whenever a step leaves
    the current bracket.
    """
    p = np.asarray(p_hat, dtype=float)
    u = np.asarray(u, dtype=float)
    lo, hi = lambda_bracket(u)
    width0 = hi - lo
    lo += BRACKET_SHRINK * width0
    hi -= BRACKET_SHRINK * width0
    nz = u != 0
    p, u = p[nz], u[nz]
    pu = p * u

    def g_and_slope(lam):
        r = 1.0 / (1.0 + lam * u)
        t = pu * r
        return float(t.sum()), -float((t * u * r).sum())

    g0 = float(pu.sum())
    if g0 == 0.0:
        return 0.0
    lam = 0.0
    a, b = lo, hi   # g(a) > 0 > g(b)
    if g0 > 0:
        a = 0.0
    else:
        b = 0.0
    g, slope = g_and_slope(lam)
    for _ in range(200):
        if abs(g) < G_TOL or (b - a) < WIDTH_TOL * width0:
            break
        if g > 0:
            a = lam
        else:
            b = lam
        step = lam - g / slope
        lam = step if a < step < b else 0.5 * (a + b)
        g, slope = g_and_slope(lam)
    if g0 > 0:
        assert lam >= 0
    else:
        assert lam <= 0
    return lam


def neg2_log_welr(dist: DiscreteDistribution, theta: float, q: float,
                  smoothed: bool = True) -> WelrEvaluation:
    """``-2 log r(theta)``; ``+inf`` where no reweighting can hit level ``q``."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    u = centered_scores(dist, theta, q, smoothed)
    if not u.min() < 0 < u.max():
        return WelrEvaluation(float(theta), math.nan, math.inf, False, (math.nan, math.nan))
    lam = solve_lambda(dist.mass, u)
    value = 2.0 * dist.n * float(dist.mass @ np.log1p(lam * u))
    return WelrEvaluation(float(theta), lam, max(value, 0.0), True, lambda_bracket(u))


def expansion_coefficients(mom: MomentSet) -> ExpansionCoefficients:
    """Coefficients ``a_1..a_4`` of the fourth-order expansion."""
    m2, m3, m4, m5, m6 = (mom.mu[k] for k in range(2, 7))
    if not m2 > 0:
        raise ValueError("mu_2 must be positive")
    a1 = 2.0 * m3 / (3.0 * m2**2)
    a2 = (m3**2 - 0.5 * m2 * m4) / m2**4
    a3 = 2.0 * (m3**3 + 0.2 * m2**2 * m5 - m2 * m3 * m4) / m2**6
    a4 = (14.0 / 3.0 * m3**4 - m2**3 * m6 / 3.0 + m2**2 * m4**2
          + 2.0 * m2**2 * m3 * m5 - 7.0 * m2 * m3**2 * m4) / m2**8
    return ExpansionCoefficients(a1, a2, a3, a4)


def tau(x, mu2: float, coefficients, k: int, rate_value: float):
    """``x**2 / mu2 * (1 + sum_{j<=k} b_j x**j)`` with ``b_j = a_j / C_n**j``.

    ``x`` is the scaled deviation ``C(eta - q)`` (array or scalar).
    """
    if not mu2 > 0:
        raise ValueError("mu_2 must be positive")
    if not 0 <= k <= 4:
        raise ValueError("k must be in 0..4")
    x = np.asarray(x, dtype=float)
    a = coefficients.as_tuple() if k else ()
    poly = np.ones_like(x)
    for j in range(1, k + 1):
        poly = poly + (a[j - 1] / rate_value**j) * x**j
    out = x**2 / mu2 * poly
    return out if out.ndim else float(out)


def expansion_statistic(n: int, rate_value: float, mom: MomentSet, k: int) -> float:
    """``A_n^(k) = C_n**2 / n * B_n^(k)`` at the moments in ``mom``."""
    if not 0 <= k <= 4:
        raise ValueError("k must be in 0..4")
    coeffs = expansion_coefficients(mom) if k else ExpansionCoefficients(0, 0, 0, 0)
    return tau(rate_value * (mom.eta_hat - mom.q), mom.mu2, coeffs, k, rate_value)


def expansion_B(n: int, mom: MomentSet, k: int) -> float:
    """``B_n^(k) = n (eta - q)**2 / mu2 * (1 + sum a_j (eta - q)**j)``."""
    d = mom.eta_hat - mom.q
    coeffs = expansion_coefficients(mom).as_tuple() if k else ()
    series = 1.0 + sum(coeffs[j - 1] * d**j for j in range(1, k + 1))
    return n * d * d / mom.mu2 * series
