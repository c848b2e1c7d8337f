"""Summary statistics for the simulation studies."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st

from .errors import DomainError
from .sampling import _gen

__all__ = ["ks_distance", "empirical_cumulants", "empirical_cf", "bootstrap_variance_se",
           "skewness", "jackknife"]


def ks_distance(samples) -> float:
    """Kolmogorov distance between the empirical law of ``samples`` and N(0, 1)."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 100:
        raise DomainError("need at least 100 samples for a Kolmogorov distance")
    return float(_st.kstest(x, "norm").statistic)


def _kstats_from_sums(n, s1, s2, s3, s4):
    """k-statistics k2..k4 from power sums (vectorized in the sums)."""
    k2 = (n * s2 - s1 ** 2) / (n * (n - 1))
    k3 = (2 * s1 ** 3 - 3 * n * s1 * s2 + n * n * s3) / (n * (n - 1) * (n - 2))
    k4 = ((-6 * s1 ** 4 + 12 * n * s1 ** 2 * s2 - 3 * n * (n - 1) * s2 ** 2
           - 4 * n * (n + 1) * s1 * s3 + n * n * (n + 1) * s4)
          / (n * (n - 1) * (n - 2) * (n - 3)))
    return k2, k3, k4


def _loo(x: np.ndarray):
    """Full-sample and leave-one-out k-statistics (k1..k4); O(n)."""
    c = x.mean()
    y = x - c
    p = [y ** q for q in (1, 2, 3, 4)]
    sums = [math.fsum(v) for v in p]
    n = len(x)
    full = (sums[0] / n + c, *_kstats_from_sums(n, *sums))
    loo_s = [s - v for s, v in zip(sums, p)]
    loo = (loo_s[0] / (n - 1) + c, *_kstats_from_sums(n - 1, *loo_s))
    return full, loo


def jackknife(full: float, loo: np.ndarray) -> float:
    n = len(loo)
    return float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def empirical_cumulants(samples, l_max: int = 4):
    """Unbiased cumulant estimates (k-statistics) k_1..k_{l_max} with jackknife SEs.

    Returns ``(values, std_errors)`` as lists indexed from order 1.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if not 1 <= l_max <= 4:
        raise DomainError("l_max must lie in 1..4")
    if x.size <= max(l_max, 4):
        raise DomainError("sample too small for the requested cumulants")
    full, loo = _loo(x)
    if full[1] <= 0:
        raise DomainError("degenerate sample (nonpositive variance estimate)")
    vals = [float(v) for v in full[:l_max]]
    ses = [jackknife(f, v) for f, v in zip(full[:l_max], loo[:l_max])]
    return vals, ses


def skewness(samples):
    """k3 / k2^{3/2} with its jackknife SE."""
    x = np.asarray(samples, dtype=float).ravel()
    full, loo = _loo(x)
    if full[1] <= 0:
        raise DomainError("degenerate sample (nonpositive variance estimate)")
    g = full[2] / full[1] ** 1.5
    gl = loo[2] / loo[1] ** 1.5
    return float(g), jackknife(g, gl)


def empirical_cf(samples, xi_grid) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    xi = np.atleast_1d(np.asarray(xi_grid, dtype=float))
    if x.size == 0 or xi.size == 0:
        raise DomainError("need a nonempty sample and grid")
    out = np.empty(xi.size, dtype=complex)
    for i, v in enumerate(xi):
        if v == 0:
            out[i] = 1.0
        else:
            out[i] = complex(np.mean(np.cos(v * x)), np.mean(np.sin(v * x)))
    return out


def bootstrap_variance_se(samples, rng, n_boot: int = 400) -> float:
    """Bootstrap standard error of the sample variance (ddof = 1)."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise DomainError("need at least two samples")
    g = _gen(rng)
    n = x.size
    batch = max(1, 4_000_000 // n)
    vals = []
    for a in range(0, n_boot, batch):
        idx = g.integers(0, n, size=(min(batch, n_boot - a), n))
        vals.append(np.var(x[idx], axis=1, ddof=1))
    return float(np.std(np.concatenate(vals), ddof=1))
