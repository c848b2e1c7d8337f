"""Random generation of isotropic flats, Poisson flat processes and radial samples.

Each random object is drawn from an :class:`RngStream`, a Philox
(counter-based) generator keyed by ``(seed, stream_id)``. Distinct stream ids
give independent streams; the same key and call sequence reproduces the
output exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ResourceError
from .geometry import DEFAULT_QUAD, Flat, QuadratureSpec, SpaceSpec, exp_from_origin
from .measures import ProcessSpec, _radial_weight, flat_measure_of_ball

__all__ = [
    "RngStream", "FlatArrays", "FlatProcessSample", "RadialSampler", "radial_sampler",
    "haar_subspace", "haar_orthogonal", "sample_radial", "sample_flat", "sample_flats",
    "sample_process", "sample_point_in_ball", "sample_zeta", "DEFAULT_CAP",
]

DEFAULT_CAP = 10 ** 6
_N_KNOTS = 1024

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)
_GL8_X = 0.5 * (_GL8_X + 1.0)
_GL8_W = 0.5 * _GL8_W


class RngStream:
    """Splittable reproducible random stream (Philox keyed by seed and stream id)."""

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise DomainError("seed and stream id must be nonnegative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.gen = np.random.Generator(np.random.Philox(ss))

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)

    @property
    def provenance(self) -> tuple[int, int]:
        return self.seed, self.stream_id

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.gen
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


# ---------------------------------------------------------------------------
# Inverse-CDF sampling of radial densities


class RadialSampler:
    """Inverse-CDF sampler for a density proportional to ``cs^k sn^(d-k-1)`` on [0, r].

    The cumulative integral is tabulated once at Chebyshev-spaced knots;
    draws locate their knot interval and are refined by safeguarded Newton
    steps on the exact local integral.
    """

    def __init__(self, kappa: int, d: int, k: int, r: float, n_knots: int = _N_KNOTS):
        self.kappa, self.d, self.k, self.r = kappa, d, k, float(r)
        i = np.arange(n_knots)
        knots = 0.5 * self.r * (1.0 - np.cos(np.pi * i / (n_knots - 1)))
        knots[0], knots[-1] = 0.0, self.r
        self.knots = knots
        pieces = self._local_integral(knots[:-1], knots[1:])
        self.cum = np.concatenate([[0.0], np.cumsum(pieces)])
        self.total = float(self.cum[-1])

    def weight(self, s):
        return _radial_weight(self.kappa, self.d, self.k, s)

    def _local_integral(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        h = (b - a)[..., None]
        return np.sum(_GL8_W * self.weight(a[..., None] + h * _GL8_X), axis=-1) * h[..., 0]

    def cdf(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.r)
        idx = np.clip(np.searchsorted(self.knots, s, side="right") - 1, 0, len(self.knots) - 2)
        return (self.cum[idx] + self._local_integral(self.knots[idx], s)) / self.total

    def ppf(self, u, tol: float = 1e-12):
        u = np.asarray(u, dtype=float)
        shape = u.shape
        target = np.ravel(u) * self.total
        idx = np.clip(np.searchsorted(self.cum, target, side="right") - 1, 0, len(self.knots) - 2)
        lo = self.knots[idx].copy()
        hi = self.knots[idx + 1].copy()
        base = lo.copy()
        rem = target - self.cum[idx]
        width = self.cum[idx + 1] - self.cum[idx]
        frac = np.where(width > 0, rem / np.where(width > 0, width, 1.0), 0.5)
        s = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
        eps = tol * max(self.r, 1.0)
        act = np.arange(len(s))
        for _ in range(60):
            sa, la, ha = s[act], lo[act], hi[act]
            f = self._local_integral(base[act], sa) - rem[act]
            la = np.where(f < 0, sa, la)
            ha = np.where(f > 0, sa, ha)
            w = self.weight(sa)
            with np.errstate(divide="ignore", invalid="ignore"):
                nxt = sa - np.where(w > 0, f / w, np.inf)
            bad = ~((nxt > la) & (nxt < ha))
            nxt = np.where(bad, 0.5 * (la + ha), nxt)
            done = (np.abs(nxt - sa) <= eps) | (ha - la <= eps) | (f == 0)
            s[act], lo[act], hi[act] = nxt, la, ha
            act = act[~done]
            if act.size == 0:
                break
        return np.clip(s, 0.0, self.r).reshape(shape)

    def sample(self, rng, size=None):
        g = _gen(rng)
        return self.ppf(g.random(size))


@lru_cache(maxsize=256)
def radial_sampler(kappa: int, d: int, k: int, r: float) -> RadialSampler:
    return RadialSampler(kappa, d, k, r)


def sample_radial(space: SpaceSpec, k: int, r: float, rng, quad: QuadratureSpec | None = None,
                  size=None):
    """Distance of an invariant random k-flat hitting B_r from the origin."""
    space.check_radius(r)
    if not 0 <= k <= space.d - 1:
        raise DomainError("k out of range")
    out = radial_sampler(space.kappa, space.d, k, float(r)).sample(rng, size)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# Haar frames and flats


def haar_orthogonal(n: int, dim: int, rng) -> np.ndarray:
    """``n`` Haar-distributed orthogonal ``dim x dim`` matrices (columns orthonormal)."""
    g = _gen(rng).standard_normal((n, dim, dim))
    q, r = np.linalg.qr(g)
    sign = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    sign[sign == 0] = 1.0
    return q * sign[:, None, :]


def haar_subspace(ambient_dim: int, sub_dim: int, rng) -> np.ndarray:
    """Orthonormal rows spanning a Haar-random ``sub_dim``-subspace of R^ambient_dim."""
    if not 1 <= sub_dim <= ambient_dim:
        raise DomainError("need 1 <= sub_dim <= ambient_dim")
    g = _gen(rng).standard_normal((ambient_dim, sub_dim))
    q, r = np.linalg.qr(g)
    sign = np.sign(np.diag(r))
    sign[sign == 0] = 1.0
    return (q * sign).T


class FlatArrays(NamedTuple):
    """Struct-of-arrays form of ``n`` flats sharing (space, k)."""

    dist: np.ndarray      # (n,)
    u: np.ndarray         # (n, d) foot direction in the tangent space at the origin
    feet: np.ndarray      # (n, D)
    frames: np.ndarray    # (n, k or k+1, D)
    normals: np.ndarray   # (n, d-k, D)
    offsets: np.ndarray   # (n, d-k)

    def __len__(self):
        return len(self.dist)

    def take(self, idx) -> "FlatArrays":
        return FlatArrays(*(a[idx] for a in self))


def _assemble(space: SpaceSpec, k: int, s: np.ndarray, Q: np.ndarray) -> FlatArrays:
    d, kap = space.d, space.kappa
    n = len(s)
    u = Q[:, :, 0]
    V = np.swapaxes(Q[:, :, 1:k + 1], 1, 2)
    rest = np.swapaxes(Q[:, :, k + 1:], 1, 2)
    if kap in (0, -1):
        m = s if kap == 0 else np.tanh(s)
        feet = m[:, None] * u
        normals = np.concatenate([u[:, None, :], rest], axis=1)
        offsets = np.zeros((n, d - k))
        offsets[:, 0] = m
        return FlatArrays(s, u, feet, V, normals, offsets)
    z = np.zeros((n, 1))
    u1 = np.concatenate([u, z], axis=1)
    V1 = np.concatenate([V, np.zeros((n, k, 1))], axis=2)
    rest1 = np.concatenate([rest, np.zeros((n, d - k - 1, 1))], axis=2)
    p = space.origin()
    c, sn_ = np.cos(s)[:, None], np.sin(s)[:, None]
    feet = c * p + sn_ * u1
    nrm0 = -sn_ * p + c * u1
    frames = np.concatenate([feet[:, None, :], V1], axis=1)
    normals = np.concatenate([nrm0[:, None, :], rest1], axis=1)
    return FlatArrays(s, u, feet, frames, normals, np.zeros((n, d - k)))


def sample_flats(space: SpaceSpec, k: int, r: float, n: int, rng,
                 quad: QuadratureSpec | None = None) -> FlatArrays:
    """``n`` i.i.d. invariant random k-flats conditioned to hit B_r."""
    space.check_radius(r)
    if not 0 <= k <= space.d - 1:
        raise DomainError("k out of range")
    s = np.atleast_1d(np.asarray(sample_radial(space, k, r, rng, quad, size=n), dtype=float))
    Q = haar_orthogonal(n, space.d, rng)
    return _assemble(space, k, s, Q)


def _to_flat(space: SpaceSpec, k: int, arrays: FlatArrays, i: int) -> Flat:
    return Flat(space, k, arrays.feet[i], arrays.frames[i], _normals=arrays.normals[i])


def sample_flat(space: SpaceSpec, k: int, r: float, rng, quad: QuadratureSpec | None = None) -> Flat:
    return _to_flat(space, k, sample_flats(space, k, r, 1, rng, quad), 0)


@dataclass
class FlatProcessSample:
    """One realization of the Poisson k-flat process restricted to flats hitting B_r."""

    proc: ProcessSpec
    r: float
    arrays: FlatArrays
    rng_provenance: tuple
    degenerate_count: int = 0
    _flats: list = field(default=None, repr=False)

    @property
    def flats(self) -> list[Flat]:
        if self._flats is None:
            sp, k = self.proc.space, self.proc.k
            self._flats = [_to_flat(sp, k, self.arrays, i) for i in range(len(self.arrays))]
        return self._flats

    @property
    def distances(self) -> np.ndarray:
        return self.arrays.dist

    def __len__(self):
        return len(self.arrays)

    @classmethod
    def from_flats(cls, proc: ProcessSpec, r: float, flats: list[Flat], provenance=(None, None)):
        """Wrap explicit flats (for hand-built configurations and tests)."""
        sp = proc.space
        from .geometry import flat_distance_to_origin
        n = len(flats)
        D = sp.ambient_dim
        dist = np.array([flat_distance_to_origin(f) for f in flats], dtype=float)
        feet = np.array([f.foot for f in flats]).reshape(n, D)
        nf = proc.k + 1 if sp.kappa == 1 else proc.k
        frames = np.array([f.frame for f in flats]).reshape(n, nf, D)
        normals = np.array([f.normals for f in flats]).reshape(n, sp.d - proc.k, D)
        offsets = np.array([f.offsets for f in flats]).reshape(n, sp.d - proc.k)
        u = np.zeros((n, sp.d))
        arr = FlatArrays(dist, u, feet, frames, normals, offsets)
        return cls(proc, r, arr, provenance, 0, list(flats))


def sample_process(space: SpaceSpec, k: int, t: float, r: float, rng,
                   quad: QuadratureSpec | None = None, cap: int = DEFAULT_CAP) -> FlatProcessSample:
    """Poisson k-flat process of intensity ``t``, restricted to flats meeting B_r."""
    proc = ProcessSpec(space, k, t, 1)
    space.check_radius(r)
    mean = t * flat_measure_of_ball(space, k, r, quad)
    if mean > cap:
        raise ResourceError(f"expected {mean:.3g} flats exceeds the cap {cap}")
    g = _gen(rng)
    n = int(g.poisson(mean))
    arrays = sample_flats(space, k, r, n, rng, quad)
    prov = rng.provenance if isinstance(rng, RngStream) else (None, None)
    return FlatProcessSample(proc, float(r), arrays, prov)


def sample_point_in_ball(space: SpaceSpec, r: float, rng, quad: QuadratureSpec | None = None,
                         size=None):
    """Uniform point(s) in the geodesic ball B_r (volume measure)."""
    space.check_radius(r)
    n = 1 if size is None else int(size)
    rho = np.atleast_1d(sample_radial(space, 0, r, rng, quad, size=n))
    g = _gen(rng).standard_normal((n, space.d))
    u = g / np.linalg.norm(g, axis=1, keepdims=True)
    pts = exp_from_origin(space, u, rho)
    return pts[0] if size is None else pts


def sample_zeta(d: int, k: int, T: float, rng, quad: QuadratureSpec | None = None,
                cap: int = DEFAULT_CAP) -> np.ndarray:
    """Points of the inhomogeneous Poisson process with intensity
    ``omega_{d-k} cosh^k sinh^(d-k-1)`` on [0, T], sorted ascending."""
    if not T > 0:
        raise DomainError("T must be positive")
    space = SpaceSpec(-1, d)
    mean = flat_measure_of_ball(space, k, T, quad)
    if mean > cap:
        raise ResourceError(f"expected {mean:.3g} points exceeds the cap {cap}")
    n = int(_gen(rng).poisson(mean))
    if n == 0:
        return np.zeros(0)
    return np.sort(np.atleast_1d(sample_radial(space, k, T, rng, quad, size=n)))
