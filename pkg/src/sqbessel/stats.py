"""Small statistics utilities: Kolmogorov-Smirnov checks and moment errors."""

from __future__ import annotations

import math

import numpy as np


def ks_statistic_1samp(samples: np.ndarray, cdf) -> float:
    """Two-sided KS statistic of samples against a scalar CDF callable."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = np.array([cdf(v) for v in x])
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


def ks_statistic_2samp(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample KS statistic."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_critical_value(alpha: float, n: int, m: int | None = None) -> float:
    """Asymptotic two-sided KS critical value at level alpha.

    One-sample when m is None, else two-sample with sizes (n, m).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    k_alpha = math.sqrt(-0.5 * math.log(0.5 * alpha))
    if m is None:
        return k_alpha / math.sqrt(n)
    return k_alpha * math.sqrt((n + m) / (n * m))


def jackknife_moment_se(samples: np.ndarray, k: int) -> float:
    """Standard error of the k-th raw sample moment (delete-1 jackknife).

    For the mean of y^k the jackknife SE coincides with s / sqrt(n); kept as
    a named helper so the moment reports state their error bars explicitly.
    """
    y = np.asarray(samples, dtype=float) ** k
    n = y.size
    return float(y.std(ddof=1) / math.sqrt(n))
