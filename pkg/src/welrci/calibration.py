"""Bootstrap calibration of the likelihood-ratio threshold.

The threshold ``c_n`` comes from an estimated ``(1 - alpha)`` percentile of
the expansion statistic ``A_n^(k)``.  Schemes with root-n estimators use the
ordinary n-out-of-n bootstrap; current-status and case-2 interval data
(cube-root rate) use the m-out-of-n bootstrap with an adaptively chosen
resample size.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._rng import order_statistic
from .bootstrap import ResampleCache
from .censoring import CensoredSample, Scheme
from .intervals import DegenerateError
from .npmle import fit_npmle
from .smoothing import moments, quantile_estimate, smoothed_cdf
from .welr import ExpansionCoefficients, expansion_coefficients, tau

GAMMA = 0.99
MAX_DEGENERATE_SHARE = 0.5
DEFAULT_B = 400


@dataclass(frozen=True)
class RateSpec:
    """Convergence rate ``C_n = n ** exponent``."""

    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "exponent", Fraction(self.exponent))
        if self.exponent not in (Fraction(1, 2), Fraction(1, 3)):
            raise ValueError("rate exponent must be 1/2 or 1/3")

    def value(self, n) -> float:
        return float(n) ** float(self.exponent)


ROOT_N = RateSpec(Fraction(1, 2))
CUBE_ROOT_N = RateSpec(Fraction(1, 3))


def convergence_rate(scheme) -> RateSpec:
    scheme = Scheme.parse(scheme)
    if scheme in (Scheme.INTERVAL1, Scheme.INTERVAL2):
        return CUBE_ROOT_N
    return ROOT_N


def select_order(scheme, k=None) -> int:
    """Smallest k with ``C_n**-(k+1) < 1/n``, unless the caller fixes ``k``."""
    if k is not None and k != "auto":
        k = int(k)
        if not 0 <= k <= 4:
            raise ValueError("k must be in 0..4")
        return k
    rate = scheme if isinstance(scheme, RateSpec) else convergence_rate(scheme)
    k = 0
    while rate.exponent * (k + 1) <= 1:
        k += 1
    return k


def threshold_from_rho(n: int, rate: RateSpec, rho_hat: float) -> float:
    """``c_n`` with ``-2 log c_n = n C_n**-2 rho_hat``."""
    if rho_hat < 0:
        raise ValueError("rho_hat must be nonnegative")
    scale = float(n) ** float(1 - 2 * rate.exponent)
    return math.exp(-0.5 * scale * rho_hat)


@dataclass(frozen=True)
class CalibrationResult:
    k: int
    rate: RateSpec
    rho_hat: float
    c_n: float
    theta_hat: float
    q: float
    alpha: float
    smoothed: bool
    mu2: float
    coefficients: ExpansionCoefficients
    draws: np.ndarray = field(repr=False)
    degenerate: int = 0
    n_b: int | None = None
    grid: tuple = ()
    xi: tuple = ()


def _pivot(dist, q, smoothed):
    if dist.m < 2:
        raise DegenerateError("single-atom NPMLE: mu_2 vanishes at the quantile estimate")
    theta = quantile_estimate(dist, q, smoothed)
    mom = moments(dist, theta, q, smoothed)
    if not mom.mu2 > 1e-12:
        raise DegenerateError("mu_2 vanishes at the quantile estimate")
    return theta, mom, expansion_coefficients(mom)


def _bootstrap_eta(fits, theta, smoothed):
    """Resampled d.f. at the fixed ``theta``; NaN where the replicate is unusable."""
    eta = np.full(len(fits), np.nan)
    for i, d in enumerate(fits):
        if d is None:
            continue
        if smoothed:
            if theta >= d.support[-1]:
                continue
            eta[i] = smoothed_cdf(d, theta)
        else:
            if theta < d.support[0] or theta >= d.support[-1]:
                continue
            eta[i] = d.cdf(theta)
    return eta


def _check_alpha(q, alpha):
    if not 0 < q < 1 or not 0 < alpha < 1:
        raise ValueError("q and alpha must lie in (0, 1)")


def calibrate_n_of_n(sample: CensoredSample, q: float, alpha: float, k=None,
                     B: int = DEFAULT_B, seed: int = 0, smoothed: bool = True,
                     tol: float = 1e-3, max_iter: int = 10000, dist=None,
                     cache: ResampleCache | None = None, engine: str = "auto") -> CalibrationResult:
    """Percentile of the expansion statistic from n-out-of-n resamples.

    The moments and coefficients are frozen at the full-sample quantile
    estimate; each replicate contributes its smoothed d.f. at that point.
    """
    _check_alpha(q, alpha)
    rate = convergence_rate(sample.scheme)
    if rate != ROOT_N:
        raise ValueError("n-out-of-n calibration applies to root-n schemes only")
    if B < 1:
        raise ValueError("B must be at least 1")
    k = select_order(rate, k)
    if dist is None:
        dist = fit_npmle(sample, tol, max_iter, engine)[0]
    theta, mom, coeffs = _pivot(dist, q, smoothed)
    if cache is None:
        cache = ResampleCache(sample, B, seed, tol, max_iter, engine=engine)
    eta = _bootstrap_eta(cache.get(sample.n), theta, smoothed)
    bad = int(np.isnan(eta).sum())
    if bad > MAX_DEGENERATE_SHARE * eta.size or bad == eta.size:
        raise DegenerateError(f"{bad} of {eta.size} bootstrap replicates are degenerate")
    n = sample.n
    c = rate.value(n)
    draws = tau(c * (eta - q), mom.mu2, coeffs, k, c)
    rho = max(order_statistic(draws, 1 - alpha), 0.0)
    return CalibrationResult(k, rate, rho, threshold_from_rho(n, rate, rho), theta, q, alpha,
                             smoothed, mom.mu2, coeffs, draws, bad)


def m_of_n_grid(n: int, d: int, gamma: float = GAMMA) -> list:
    """``b_0 = ceil(sqrt(n))``, then steps of ``d`` while ``b_j <= n**gamma``."""
    if d < 1:
        raise ValueError("grid step d must be at least 1")
    b0 = math.isqrt(n)
    if b0 * b0 < n:
        b0 += 1
    top = n**gamma
    grid = []
    b = b0
    while b <= top:
        grid.append(b)
        b += d
    return grid


def calibrate_m_of_n(sample: CensoredSample, q: float, alpha: float, k=None,
                     B: int = DEFAULT_B, d: int = 1, seed: int = 0, smoothed: bool = True,
                     tol: float = 1e-3, max_iter: int = 10000, dist=None,
                     cache: ResampleCache | None = None, engine: str = "auto") -> CalibrationResult:
    """Percentile of the expansion statistic from m-out-of-n resamples.

    For each grid size ``b_j`` the ``(1 - alpha)`` percentile ``xi_j`` of
    ``[b_j**(1/3) (eta* - q)]**2 / mu_2`` is computed; the resample size is
    the ``b_j`` minimizing ``|xi_j - xi_{j-1}|`` (first one on ties) and its
    replicates feed the statistic.
    """
    _check_alpha(q, alpha)
    rate = convergence_rate(sample.scheme)
    if rate != CUBE_ROOT_N:
        raise ValueError("m-out-of-n calibration applies to cube-root schemes only")
    if B < 1:
        raise ValueError("B must be at least 1")
    k = select_order(rate, k)
    n = sample.n
    grid = m_of_n_grid(n, d)
    if len(grid) < 2:
        raise ValueError(f"n = {n} leaves fewer than two resample sizes in the grid")
    if dist is None:
        dist = fit_npmle(sample, tol, max_iter, engine)[0]
    theta, mom, coeffs = _pivot(dist, q, smoothed)
    if cache is None:
        cache = ResampleCache(sample, B, seed, tol, max_iter, engine=engine)

    kept, xi, etas, bad_counts = [], [], [], []
    for b in grid:
        eta = _bootstrap_eta(cache.get(b), theta, smoothed)
        bad = int(np.isnan(eta).sum())
        if bad > MAX_DEGENERATE_SHARE * eta.size:
            warnings.warn(f"dropping resample size {b}: {bad} of {eta.size} replicates degenerate")
            continue
        kept.append(b)
        etas.append(eta)
        bad_counts.append(bad)
        xi.append(order_statistic((rate.value(b) * (eta - q)) ** 2 / mom.mu2, 1 - alpha))
    if len(kept) < 2:
        raise DegenerateError("fewer than two usable resample sizes")
    j = 1 + int(np.argmin(np.abs(np.diff(xi))))
    n_b = kept[j]
    c = rate.value(n)
    draws = tau(rate.value(n_b) * (etas[j] - q), mom.mu2, coeffs, k, c)
    rho = max(order_statistic(draws, 1 - alpha), 0.0)
    return CalibrationResult(k, rate, rho, threshold_from_rho(n, rate, rho), theta, q, alpha,
                             smoothed, mom.mu2, coeffs, draws, bad_counts[j], n_b,
                             tuple(kept), tuple(xi))


def calibrate(sample: CensoredSample, q: float, alpha: float, k=None, B: int = DEFAULT_B,
              d: int | None = None, seed: int = 0, smoothed: bool = True, **kwargs):
    """n-out-of-n or m-out-of-n calibration according to the scheme's rate."""
    if convergence_rate(sample.scheme) == ROOT_N:
        return calibrate_n_of_n(sample, q, alpha, k, B, seed, smoothed, **kwargs)
    if d is None:
        d = max(1, sample.n // 10)
    return calibrate_m_of_n(sample, q, alpha, k, B, d, seed, smoothed, **kwargs)
