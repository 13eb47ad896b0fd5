"""Seeded random streams and the order-statistic percentile used everywhere.

All randomness goes through PCG64 generators keyed by a 64-bit seed plus a
tuple of stream indices (``SeedSequence`` spawn keys), so any sub-stream can
be reproduced without replaying the ones before it.
"""
from __future__ import annotations

import math

import numpy as np


def make_rng(seed, *keys) -> np.random.Generator:
    """PCG64 generator for stream ``(seed, *keys)``."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def order_statistic(draws, level: float) -> float:
    """The ``ceil(level * B)``-th smallest of ``B`` draws (at least the first).

    NaN draws are ignored.
    """
    x = np.asarray(draws, dtype=float)
    x = np.sort(x[~np.isnan(x)])
    if x.size == 0:
        raise ValueError("no valid draws")
    rank = max(1, math.ceil(level * x.size - 1e-9))
    return float(x[min(rank, x.size) - 1])
