"""Intersection-volume functionals of a sampled flat configuration.

``intersection_functional`` evaluates the total (d - m(d-k))-volume inside a
window of all m-fold intersections of distinct flats. Subsets are enumerated
level by level: all pairs first, then surviving pairs are extended by larger
indices, so an Empty prefix prunes every superset at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DomainError, ResourceError
from .geometry import (DEGENERATE, EMPTY, QuadratureSpec, SpaceSpec, _slice_volume, flat_distance_to_origin,
                       intersect_flats, intersect_systems, omega)
from .measures import ProcessSpec, kernel_prefactor
from .sampling import FlatProcessSample, _gen

__all__ = [
    "Ball", "General", "Window", "FunctionalResult", "intersection_functional",
    "chaos_kernel", "standardize", "rescale_limit", "COMBINATORIAL_CAP",
]

COMBINATORIAL_CAP = 10 ** 8
_CHUNK = 50_000


@dataclass(frozen=True)
class Ball:
    """Geodesic ball of radius ``r`` about the origin."""

    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("ball radius must be positive")


@dataclass(frozen=True)
class General:
    """Window given by a vectorized membership predicate on model coordinates.

    ``membership`` maps an (n, D) array of points to a boolean array of length
    n; the window must lie inside the ball of radius ``bounding_radius``.
    """

    membership: Callable[[np.ndarray], np.ndarray]
    bounding_radius: float
    mc_points: int = 100_000

    def __post_init__(self):
        if not self.bounding_radius > 0:
            raise DomainError("bounding radius must be positive")
        if self.mc_points < 1:
            raise DomainError("mc_points must be positive")


Window = Union[Ball, General]


@dataclass
class FunctionalResult:
    value: float
    tuples_evaluated: int
    empty_count: int = 0
    degenerate_count: int = 0
    mc_se: float = 0.0


def _extend(tuples: np.ndarray, n: int) -> np.ndarray:
    """All extensions of each tuple by one index larger than its last entry."""
    last = tuples[:, -1]
    counts = n - 1 - last
    total = int(counts.sum())
    if total == 0:
        return np.zeros((0, tuples.shape[1] + 1), dtype=np.int64)
    rep = np.repeat(np.arange(len(tuples)), counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    new = np.repeat(last + 1, counts) + (np.arange(total) - starts)
    return np.concatenate([tuples[rep], new[:, None]], axis=1)


def _solve(kappa, d, arrays, tuples, expected, rank_tol):
    """Intersect the flats indexed by each row of ``tuples`` (chunked)."""
    nt = len(tuples)
    D = arrays.normals.shape[-1]
    status = np.empty(nt, dtype=np.int8)
    dist = np.empty(nt)
    foot = np.empty((nt, D))
    vts = np.empty((nt, D, D))
    for a in range(0, nt, _CHUNK):
        idx = tuples[a:a + _CHUNK]
        A = arrays.normals[idx].reshape(len(idx), -1, D)
        b = arrays.offsets[idx].reshape(len(idx), -1)
        st, ds, ft, vt = intersect_systems(kappa, d, A, b, expected, rank_tol)
        status[a:a + _CHUNK], dist[a:a + _CHUNK] = st, ds
        foot[a:a + _CHUNK], vts[a:a + _CHUNK] = ft, vt
    return status, dist, foot, vts


def _enumerate(space: SpaceSpec, k: int, arrays, m: int, rank_tol: float):
    """Generic m-fold intersections as (distances, feet, direction rows) plus counts."""
    d, kap = space.d, space.kappa
    n = len(arrays)
    empty = degen = 0
    tuples = np.arange(n, dtype=np.int64)[:, None]
    dist, feet, vts = arrays.dist, arrays.feet, None
    for level in range(2, m + 1):
        tuples = _extend(tuples, n)
        expected = d - level * (d - k)
        status, dist, feet, vts = _solve(kap, d, arrays, tuples, expected, rank_tol)
        bad = status != 0
        if np.any(bad):
            # a failed prefix settles every m-subset that extends it
            ext = np.array([math.comb(n - 1 - int(x), m - level) for x in tuples[bad, -1]])
            st = status[bad]
            empty += int(ext[st == 1].sum())
            degen += int(ext[st == 2].sum())
            good = ~bad
            tuples, dist, feet, vts = tuples[good], dist[good], feet[good], vts[good]
    return tuples, dist, feet, vts, empty, degen


def _directions(space: SpaceSpec, j: int, feet, vts, arrays=None):
    """Orthonormal tangent directions (rows) of each intersection flat at its foot."""
    D = space.ambient_dim
    if arrays is not None:
        fr = arrays.frames
        return fr[:, 1:] if space.kappa == 1 else fr
    if space.kappa != 1:
        return vts[:, D - j:]
    span = vts[:, D - j - 1:]
    proj = np.einsum("nid,nie->nde", span, span) - np.einsum("nd,ne->nde", feet, feet)
    w, v = np.linalg.eigh(proj)
    return np.swapaxes(v[:, :, D - j:], 1, 2)


def _ball_mc(space: SpaceSpec, j: int, s: float, foot, dirs, window: General, g):
    """Unbiased MC estimate (and its SE) of the j-volume of (flat cap window)."""
    R = window.bounding_radius
    n = window.mc_points
    kap = space.kappa
    if j == 0:
        return float(window.membership(foot[None, :])[0]), 0.0
    gauss = g.standard_normal((n, j))
    unit = gauss / np.linalg.norm(gauss, axis=1, keepdims=True)
    if kap == 0:
        rho = math.sqrt(max(R * R - s * s, 0.0))
        vol = omega(j) / j * rho ** j
        x = foot + (rho * g.random(n) ** (1.0 / j))[:, None] * (unit @ dirs)
        w = window.membership(x).astype(float)
    elif kap == -1:
        t2 = float(foot @ foot)
        rho = math.sqrt(max(math.tanh(R) ** 2 - t2, 0.0))
        vol = omega(j) / j * rho ** j
        x = foot + (rho * g.random(n) ** (1.0 / j))[:, None] * (unit @ dirs)
        nx2 = np.minimum(np.sum(x * x, axis=1), 1.0 - 1e-16)
        w = math.sqrt(1.0 - t2) / (1.0 - nx2) ** ((j + 1) / 2) * window.membership(x)
    else:
        # normal coordinates on the great j-sphere, weighted by the sine Jacobian
        rho = float(np.arccos(np.clip(math.cos(R) / math.cos(s), -1.0, 1.0)))
        vol = omega(j) / j * rho ** j
        rr = rho * g.random(n) ** (1.0 / j)
        x = np.cos(rr)[:, None] * foot + np.sin(rr)[:, None] * (unit @ dirs)
        jac = np.where(rr > 0, np.sin(rr) / np.where(rr > 0, rr, 1.0), 1.0) ** (j - 1)
        w = jac * window.membership(x)
    if rho == 0.0:
        return 0.0, 0.0
    vals = vol * w
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(np.mean(vals)), se


def intersection_functional(sample: FlatProcessSample, window: Window, m: int,
                            rank_tol: float = 1e-8, rng=None,
                            cap: int = COMBINATORIAL_CAP) -> FunctionalResult:
    """Total volume of the m-fold intersections of distinct flats inside ``window``."""
    space, k = sample.proc.space, sample.proc.k
    d = space.d
    j = d - m * (d - k)
    if m < 1 or j < 0:
        raise DomainError(f"no generic {m}-fold intersections for d={d}, k={k}")
    n = len(sample)
    total = math.comb(n, m)
    if total > cap:
        raise ResourceError(f"C({n},{m}) = {total} exceeds the combinatorial cap {cap}")
    if isinstance(window, General) and rng is None:
        raise DomainError("general windows need an rng for the Monte Carlo volume")
    if total == 0:
        return FunctionalResult(0.0, 0)
    arrays = sample.arrays
    if m == 1:
        dist, feet, vts, empty, degen = arrays.dist, arrays.feet, None, 0, 0
    else:
        _, dist, feet, vts, empty, degen = _enumerate(space, k, arrays, m, rank_tol)

    if isinstance(window, Ball):
        r = window.r
        if j == 0:
            value = float(np.count_nonzero(dist < r))
        else:
            value = math.fsum(_slice_volume(space.kappa, j, r, dist[dist < r]))
        return FunctionalResult(value, total, empty, degen, 0.0)

    g = _gen(rng)
    dirs = _directions(space, j, feet, vts, arrays if m == 1 else None) if j > 0 else None
    parts, var = [], 0.0
    for i in np.flatnonzero(dist < window.bounding_radius):
        est, se = _ball_mc(space, j, float(dist[i]), feet[i], None if dirs is None else dirs[i], window, g)
        parts.append(est)
        var += se * se
    return FunctionalResult(math.fsum(parts), total, empty, degen, math.sqrt(var))


def chaos_kernel(proc: ProcessSpec, i: int, flats, window: Ball, rank_tol: float = 1e-8,
                 quad: QuadratureSpec | None = None) -> float:
    """Value of the i-th chaos kernel of F^(m) on the flats ``flats``."""
    if not isinstance(window, Ball):
        raise DomainError("chaos kernels are evaluated on ball windows")
    if len(flats) != i:
        raise DomainError("need exactly i flats")
    d, k = proc.space.d, proc.k
    pref = kernel_prefactor(d, k, proc.m, i, proc.t)
    j = d - i * (d - k)
    if i == 1:
        s = flat_distance_to_origin(flats[0])
    else:
        meet = intersect_flats(proc.space, flats, rank_tol)
        if meet is EMPTY or meet is DEGENERATE:
            return 0.0
        s = flat_distance_to_origin(meet)
    if s >= window.r:
        return 0.0
    return pref * float(_slice_volume(proc.space.kappa, j, window.r, s))


def standardize(value, mean, variance):
    if not variance > 0:
        raise DomainError("variance must be positive")
    return (np.asarray(value, dtype=float) - mean) / math.sqrt(variance)


def rescale_limit(value, mean, r, k):
    """Centre and divide by e^{r(k-1)}."""
    return (np.asarray(value, dtype=float) - mean) / math.exp(r * (k - 1))
