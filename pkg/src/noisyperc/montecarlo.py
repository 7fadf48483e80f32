"""Replicate runner and the mean / standard-error reductions used by every estimator."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np


def run_replicates(fn: Callable[[int], object], replicates: int, threads: int = 1) -> np.ndarray:
    """Evaluate ``fn(r)`` for r in 0..replicates-1; row r of the result is replicate r.

    Each replicate draws only from its own stream, and the rows come back in
    replicate order, so the output does not depend on ``threads``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if threads <= 1:
        rows = [fn(r) for r in range(replicates)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(fn, range(replicates), chunksize=max(1, replicates // (8 * threads))))
    return np.asarray(rows)


def mean_se(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and sample-sd / sqrt(R) along axis 0."""
    samples = np.asarray(samples, dtype=np.float64)
    R = samples.shape[0]
    mean = samples.mean(axis=0)
    if R < 2:
        return mean, np.zeros_like(mean)
    return mean, samples.std(axis=0, ddof=1) / np.sqrt(R)


def covariance_se(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Empirical covariance of two indicator columns and its standard error.

    The SE is that of the mean of the centred products.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    prod = (a - a.mean()) * (b - b.mean())
    R = a.shape[0]
    cov = float(prod.sum() / (R - 1)) if R > 1 else 0.0
    se = float(prod.std(ddof=1) / np.sqrt(R)) if R > 1 else 0.0
    return cov, se
