"""Metric geometry of the space forms of curvature -1, 0 and +1.

Model coordinates:

* ``kappa = 0``: plain ``R^d`` with the origin at zero.
* ``kappa = -1``: the Beltrami-Klein model on the open unit ball of ``R^d``.
  Flats are (nonempty) intersections of affine subspaces with the ball.
* ``kappa = +1``: the unit sphere in ``R^{d+1}``; the origin is the last
  basis vector. A k-flat is a great k-sphere, stored through an orthonormal
  basis of its spanning (k+1)-dimensional linear subspace.

In every model a flat is the solution set of a linear system, so one
rank-revealing routine (SVD) computes all intersections.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DimensionMismatchError, DomainError, FrameError

__all__ = [
    "SpaceSpec", "Flat", "QuadratureSpec", "Intersection", "EMPTY", "DEGENERATE",
    "sn", "cs", "omega", "log_omega", "sn_power_integral", "distance",
    "ball_volume", "slice_radius", "slice_volume", "flat_from_foot",
    "flat_distance_to_origin", "intersect_flats", "intersect_systems",
    "bk_volume_density", "bk_flat_measure_density", "exp_from_origin",
    "translate_origin_to", "exp_map", "random_rotation",
]

_POINT_TOL = 1e-12
_FRAME_TOL = 1e-8

# Gauss-Legendre nodes on [0, 1] for short-interval power integrals.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class SpaceSpec:
    """Curvature ``kappa`` in {-1, 0, 1} and dimension ``d >= 2``."""

    kappa: int
    d: int

    def __post_init__(self):
        if self.kappa not in (-1, 0, 1):
            raise DomainError(f"kappa must be -1, 0 or 1, got {self.kappa}")
        if int(self.d) != self.d or self.d < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.d}")

    @property
    def ambient_dim(self) -> int:
        return self.d + 1 if self.kappa == 1 else self.d

    def origin(self) -> np.ndarray:
        p = np.zeros(self.ambient_dim)
        if self.kappa == 1:
            p[-1] = 1.0
        return p

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise DomainError(f"point has {x.shape[-1]} coordinates, expected {self.ambient_dim}")
        norm = np.linalg.norm(x, axis=-1)
        if self.kappa == -1 and np.any(norm >= 1.0):
            raise DomainError("Beltrami-Klein points must lie in the open unit ball")
        if self.kappa == 1 and np.any(np.abs(norm - 1.0) > _POINT_TOL):
            raise DomainError("spherical points must have unit norm")
        return x

    def max_radius(self) -> float:
        return math.pi / 2 if self.kappa == 1 else math.inf

    def check_radius(self, r: float) -> float:
        if not r > 0:
            raise DomainError(f"radius must be positive, got {r}")
        if self.kappa == 1 and r > math.pi / 2 + 1e-15:
            raise DomainError(f"spherical balls need r <= pi/2, got {r}")
        return float(r)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 60

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")

    def quad(self, f, a, b, **kw):
        """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]`` (value only)."""
        limit = kw.pop("limit", max(self.max_subdivisions, 50))
        val, _ = integrate.quad(f, a, b, epsrel=self.rel_tol, epsabs=kw.pop("epsabs", 0.0),
                                limit=limit, **kw)
        return val


DEFAULT_QUAD = QuadratureSpec()


class Intersection(enum.Enum):
    EMPTY = "empty"
    DEGENERATE = "degenerate"


EMPTY = Intersection.EMPTY
DEGENERATE = Intersection.DEGENERATE


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Flat:
    """A k-flat given by its foot point and an orthonormal direction frame.

    For ``kappa in {0, -1}`` the frame holds ``k`` vectors orthogonal to the
    foot; for ``kappa = 1`` it holds ``k + 1`` vectors spanning the linear
    hull of the great sphere, and ``foot`` is the point of the flat nearest
    to the origin.
    """

    space: SpaceSpec
    k: int
    foot: np.ndarray
    frame: np.ndarray
    _normals: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        sp, k = self.space, self.k
        if not 0 <= k <= sp.d - 1:
            raise DomainError(f"flat dimension must be in [0, {sp.d - 1}], got {k}")
        foot = _readonly(self.foot)
        nvec = k + 1 if sp.kappa == 1 else k
        frame = _readonly(np.reshape(self.frame, (nvec, sp.ambient_dim)))
        object.__setattr__(self, "foot", foot)
        object.__setattr__(self, "frame", frame)
        gram = frame @ frame.T
        if nvec and np.max(np.abs(gram - np.eye(nvec))) > _FRAME_TOL:
            raise FrameError("flat frame is not orthonormal")
        if sp.kappa in (0, -1) and nvec and np.max(np.abs(frame @ foot)) > _FRAME_TOL:
            raise FrameError("frame vectors must be orthogonal to the foot point")
        if sp.kappa == -1 and np.linalg.norm(foot) >= 1.0:
            raise DomainError("hyperbolic flat misses the Beltrami-Klein ball")
        if self._normals is None:
            object.__setattr__(self, "_normals", _readonly(_complement(frame, sp.ambient_dim)))

    @property
    def normals(self) -> np.ndarray:
        """Orthonormal rows spanning the complement of the direction space."""
        return self._normals

    @property
    def offsets(self) -> np.ndarray:
        if self.space.kappa == 1:
            return np.zeros(len(self._normals))
        return self._normals @ self.foot

    def contains(self, x, tol: float = 1e-10) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(np.abs(self._normals @ x - self.offsets) <= tol))

    def point(self, coeffs) -> np.ndarray:
        """Point of the flat with the given coordinates along the frame.

        For the sphere the coefficients are tangent coordinates at the foot
        and the result is the exponential map of that tangent vector.
        """
        c = np.asarray(coeffs, dtype=float)
        if self.space.kappa in (0, -1):
            return self.foot + c @ self.frame
        tang = _complement(self.foot[None, :], self.space.ambient_dim, basis=self.frame)
        v = c @ tang
        rho = np.linalg.norm(v, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(rho > 0, v / np.where(rho > 0, rho, 1.0), 0.0)
        return np.cos(rho) * self.foot + np.sin(rho) * u


def _complement(rows: np.ndarray, dim: int, basis: np.ndarray | None = None) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``rows``.

    With ``basis`` given, the complement is taken inside span(basis).
    """
    rows = np.atleast_2d(rows)
    if basis is None:
        basis = np.eye(dim)
    proj = basis - (basis @ rows.T) @ rows if rows.size else basis.copy()
    u, s, vt = np.linalg.svd(proj, full_matrices=False)
    rank = int(np.sum(s > 1e-9))
    return vt[:rank]


# ---------------------------------------------------------------------------
# Trigonometry of the three space forms


def sn(kappa: int, s):
    """sin, identity or sinh of ``s`` for kappa = 1, 0, -1."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("sn needs s >= 0")
    if kappa == 1:
        if np.any(s_arr > math.pi + 1e-12):
            raise DomainError("sn(1, s) needs s <= pi")
        out = np.sin(s_arr)
    elif kappa == 0:
        out = s_arr.copy()
    elif kappa == -1:
        out = np.sinh(s_arr)
    else:
        raise DomainError(f"bad curvature {kappa}")
    return out if out.ndim else float(out)


def cs(kappa: int, s):
    """cos, 1 or cosh of ``s`` for kappa = 1, 0, -1."""
    s_arr = np.asarray(s, dtype=float)
    if kappa == 1:
        out = np.cos(s_arr)
    elif kappa == 0:
        out = np.ones_like(s_arr)
    elif kappa == -1:
        out = np.cosh(s_arr)
    else:
        raise DomainError(f"bad curvature {kappa}")
    return out if out.ndim else float(out)


def log_omega(l: int) -> float:
    if l < 1:
        raise DomainError(f"omega needs l >= 1, got {l}")
    return math.log(2.0) + 0.5 * l * math.log(math.pi) - float(gammaln(0.5 * l))


def omega(l: int) -> float:
    """Surface area of the unit (l-1)-sphere, 2 pi^(l/2) / Gamma(l/2)."""
    return math.exp(log_omega(l))


def sn_power_integral(kappa: int, n: int, a):
    """Integral of sn_kappa(u)^n over [0, a], vectorized over ``a``.

    Uses the reduction formula for a >= 1 and 20-point Gauss-Legendre on
    short intervals, where the reduction formula cancels badly.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise DomainError("upper limit must be nonnegative")
    if kappa == 0:
        out = a ** (n + 1) / (n + 1)
        return out if out.ndim else float(out)
    f = np.sinh if kappa == -1 else np.sin
    out = np.empty_like(a)
    small = a < 1.0
    if np.any(small):
        aa = a[small][..., None]
        out[small] = np.sum(_GL_W * f(aa * _GL_X) ** n, axis=-1) * aa[..., 0]
    if np.any(~small):
        out[~small] = _reduction(kappa, n, a[~small])
    return out if out.ndim else float(out)


def _reduction(kappa, n, a):
    if kappa == -1:
        s, c = np.sinh(a), np.cosh(a)
        i_prev, i_cur = a, c - 1.0  # I_0, I_1
        sign = 1.0
    else:
        s, c = np.sin(a), np.cos(a)
        i_prev, i_cur = a, 1.0 - c
        sign = -1.0
    if n == 0:
        return i_prev
    for j in range(2, n + 1):
        # I_j = (+/-) sn^{j-1} cs / j + (-/+)(j-1)/j I_{j-2}
        nxt = sign * s ** (j - 1) * c / j - sign * (j - 1) / j * i_prev
        i_prev, i_cur = i_cur, nxt
    return i_cur


def distance(space: SpaceSpec, x, y):
    """Geodesic distance between points (broadcasts over leading axes)."""
    x = space.check_point(x)
    y = space.check_point(y)
    wedge2 = _wedge_norm2(x, y)
    if space.kappa == 0:
        out = np.linalg.norm(x - y, axis=-1)
    elif space.kappa == 1:
        out = np.arctan2(np.sqrt(wedge2), np.sum(x * y, axis=-1))
    else:
        diff2 = np.sum((x - y) ** 2, axis=-1)
        num = np.maximum(diff2 - wedge2, 0.0)
        den = (1.0 - np.sum(x * x, axis=-1)) * (1.0 - np.sum(y * y, axis=-1))
        out = np.arcsinh(np.sqrt(num / den))
    return out if np.ndim(out) else float(out)


def _wedge_norm2(x, y):
    outer = x[..., :, None] * y[..., None, :]
    w = outer - np.swapaxes(outer, -1, -2)
    return 0.5 * np.sum(w * w, axis=(-1, -2))


def ball_volume(space: SpaceSpec, r: float, quad: QuadratureSpec | None = None) -> float:
    """Volume of a geodesic ball of radius ``r``."""
    space.check_radius(r)
    if space.kappa == 0:
        return math.exp(0.5 * space.d * math.log(math.pi) - float(gammaln(0.5 * space.d + 1))) * r ** space.d
    return omega(space.d) * float(sn_power_integral(space.kappa, space.d - 1, r))


def slice_radius(kappa: int, r, s):
    """Geodesic radius of the section of B_r by a flat at distance s <= r."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if kappa == 0:
        return np.sqrt(np.maximum((r - s) * (r + s), 0.0))
    if kappa == -1:
        q = np.maximum(np.sinh(r - s) * np.sinh(r + s), 0.0)
        return np.arcsinh(np.sqrt(q) / np.cosh(s))
    q = np.maximum(np.sin(r - s) * np.sin(r + s), 0.0)
    return np.arctan2(np.sqrt(q), np.cos(r))


def slice_volume(space: SpaceSpec, j: int, r: float, s, quad: QuadratureSpec | None = None,
                 method: str = "closed"):
    """j-volume of (j-flat at distance ``s`` from the centre) intersected with B_r.

    ``method="quad"`` evaluates the radial integral adaptively instead of by
    the closed form; it exists for cross-checking.
    """
    space.check_radius(r)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("distance must be nonnegative")
    if np.any(s_arr > r * (1 + 1e-14)):
        raise DomainError("slice distance exceeds the ball radius")
    s_arr = np.minimum(s_arr, r)
    out = _slice_volume(space.kappa, j, r, s_arr, quad, method)
    return out if np.ndim(out) else float(out)


def _slice_volume(kappa, j, r, s, quad=None, method="closed"):
    """Unchecked, vectorized slice volume; zero for s >= r."""
    s = np.asarray(s, dtype=float)
    if j == 0:
        return np.where(s <= r, 1.0, 0.0)
    rho = np.where(s < r, slice_radius(kappa, r, np.minimum(s, r)), 0.0)
    if method == "quad":
        q = quad or DEFAULT_QUAD
        f = (lambda u: np.sinh(u) ** (j - 1)) if kappa == -1 else (
            (lambda u: np.sin(u) ** (j - 1)) if kappa == 1 else (lambda u: u ** (j - 1)))
        vals = np.array([q.quad(f, 0.0, float(x)) for x in np.ravel(rho)]).reshape(rho.shape)
        return omega(j) * vals
    return omega(j) * sn_power_integral(kappa, j - 1, rho)


# ---------------------------------------------------------------------------
# Flats


def flat_from_foot(space: SpaceSpec, k: int, u, s: float, V) -> Flat:
    """The k-flat through the point at distance ``s`` along ``u``, orthogonal there to the ray."""
    u = np.asarray(u, dtype=float)
    V = np.reshape(np.asarray(V, dtype=float), (k, space.ambient_dim))
    if s < 0:
        raise DomainError("distance must be nonnegative")
    if abs(np.linalg.norm(u) - 1.0) > _FRAME_TOL:
        raise FrameError("direction must be a unit vector")
    if k and (np.max(np.abs(V @ V.T - np.eye(k))) > _FRAME_TOL or np.max(np.abs(V @ u)) > _FRAME_TOL):
        raise FrameError("frame must be orthonormal and orthogonal to the direction")
    if space.kappa == 0:
        return Flat(space, k, s * u, V)
    if space.kappa == -1:
        return Flat(space, k, math.tanh(s) * u, V)
    p = space.origin()
    if abs(u @ p) > _FRAME_TOL or (k and np.max(np.abs(V @ p)) > _FRAME_TOL):
        raise FrameError("spherical directions must be tangent at the pole")
    if s > math.pi / 2 + 1e-12:
        raise DomainError("spherical flats lie within pi/2 of the pole")
    foot = math.cos(s) * p + math.sin(s) * u
    return Flat(space, k, foot, np.vstack([foot[None, :], V]))


def flat_distance_to_origin(flat: Flat) -> float:
    sp = flat.space
    if sp.kappa == 0:
        return float(np.linalg.norm(flat.foot))
    if sp.kappa == -1:
        return float(np.arctanh(np.linalg.norm(flat.foot)))
    p = sp.origin()
    par = np.linalg.norm(flat.frame @ p)
    perp = np.linalg.norm(flat.normals @ p)
    return float(np.arctan2(perp, par))


def intersect_systems(kappa: int, d: int, normals: np.ndarray, offsets: np.ndarray,
                      expected_dim: int, rank_tol: float = 1e-8):
    """Batched intersection of stacked linear systems.

    ``normals`` has shape (N, R, D) and ``offsets`` (N, R) (ignored on the
    sphere). Returns ``(status, dist, foot, null)`` where status is 0 for a
    generic intersection, 1 for Empty and 2 for Degenerate; ``dist`` is the
    geodesic distance of the intersection to the origin (nan unless status
    is 0); ``foot`` is the Euclidean foot point for kappa in {0,-1} or the
    nearest point to the pole on the sphere; ``null`` holds the right
    singular vectors (rows beyond the rank span the direction space).
    """
    A = np.asarray(normals, dtype=float)
    n, R, D = A.shape
    u, sv, vt = np.linalg.svd(A, full_matrices=True)
    smax = sv[:, :1]
    rank = np.sum(sv > rank_tol * np.maximum(smax, 1e-300), axis=1)
    status = np.zeros(n, dtype=np.int8)
    dist = np.full(n, np.nan)
    kmin = min(R, D)
    if kappa == 1:
        p = np.zeros(D)
        p[-1] = 1.0
        proj = vt @ p  # (n, D) coefficients of p in the right singular basis
        idx = np.arange(D)[None, :]
        in_row = idx < rank[:, None]
        perp = np.sqrt(np.sum(np.where(in_row, proj, 0.0) ** 2, axis=1))
        par_vec = np.einsum("nk,nkd->nd", np.where(in_row, 0.0, proj), vt)
        par = np.linalg.norm(par_vec, axis=1)
        dim = D - rank - 1
        first_null = np.take_along_axis(vt, np.minimum(rank, D - 1)[:, None, None], axis=1)[:, 0]
        foot = np.where(par[:, None] > 0, par_vec / np.where(par > 0, par, 1.0)[:, None], first_null)
        dist[:] = np.arctan2(perp, par)
        status[dim != expected_dim] = 2
        dist[status != 0] = np.nan
        return status, dist, foot, vt
    b = np.asarray(offsets, dtype=float)
    # min-norm solution: foot of the origin on the solution flat
    utb = np.einsum("nrk,nr->nk", u[:, :, :kmin], b)
    keep = np.arange(kmin)[None, :] < rank[:, None]
    coef = np.where(keep, utb / np.where(keep, sv, 1.0), 0.0)
    foot = np.einsum("nk,nkd->nd", coef, vt[:, :kmin, :])
    resid = np.linalg.norm(np.einsum("nrd,nd->nr", A, foot) - b, axis=1)
    infeasible = resid > rank_tol * np.maximum(1.0, np.linalg.norm(b, axis=1))
    dim = D - rank
    fnorm = np.linalg.norm(foot, axis=1)
    if kappa == 0:
        status[infeasible | (dim != expected_dim)] = 2
        dist = np.where(status == 0, fnorm, np.nan)
    else:
        empty = infeasible | (fnorm >= 1.0)
        status[empty] = 1
        status[(~empty) & (dim != expected_dim)] = 2
        with np.errstate(invalid="ignore", divide="ignore"):
            dist = np.where(status == 0, np.arctanh(np.minimum(fnorm, 1.0 - 1e-300)), np.nan)
    return status, dist, foot, vt


def intersect_flats(space: SpaceSpec, flats: Sequence[Flat], rank_tol: float = 1e-8
                    ) -> Union[Flat, Intersection]:
    """Intersection of m >= 2 flats of common dimension k.

    Returns the generic (d - m(d-k))-flat, ``EMPTY`` (hyperbolic meet
    outside the model ball, or inconsistent system) or ``DEGENERATE`` when
    the computed dimension is not the generic one.
    """
    if len(flats) < 2:
        raise DomainError("need at least two flats")
    k = flats[0].k
    for f in flats:
        if f.space != space or f.k != k:
            raise DimensionMismatchError("flats must share the space and dimension")
    m = len(flats)
    expected = space.d - m * (space.d - k)
    A = np.concatenate([f.normals for f in flats])[None]
    b = np.concatenate([f.offsets for f in flats])[None]
    status, dist, foot, vt = intersect_systems(space.kappa, space.d, A, b, expected, rank_tol)
    if status[0] == 1:
        return EMPTY
    if status[0] == 2:
        return DEGENERATE
    if expected < 0:
        return EMPTY
    D = space.ambient_dim
    nrank = D - (expected + 1 if space.kappa == 1 else expected)
    directions = vt[0, nrank:]
    if space.kappa == 1:
        foot0 = foot[0]
        others = _complement(foot0[None, :], D, basis=directions)
        return Flat(space, expected, foot0, np.vstack([foot0[None, :], others]))
    return Flat(space, expected, foot[0], directions)


# ---------------------------------------------------------------------------
# Beltrami-Klein densities


def bk_volume_density(flat: Flat, x) -> float:
    """Density of hyperbolic k-volume on ``flat`` w.r.t. Euclidean k-volume at ``x``."""
    if flat.space.kappa != -1:
        raise DomainError("Beltrami-Klein density needs kappa = -1")
    x = np.asarray(x, dtype=float)
    nx2 = np.sum(x * x, axis=-1)
    if np.any(nx2 >= 1.0):
        raise DomainError("point outside the Beltrami-Klein ball")
    tau2 = float(flat.foot @ flat.foot)
    out = math.sqrt(1.0 - tau2) / (1.0 - nx2) ** ((flat.k + 1) / 2)
    return out if np.ndim(out) else float(out)


def bk_flat_measure_density(flat: Flat) -> float:
    """Density of the hyperbolic invariant flat measure w.r.t. the Euclidean one."""
    if flat.space.kappa != -1:
        raise DomainError("Beltrami-Klein density needs kappa = -1")
    tau2 = float(flat.foot @ flat.foot)
    return (1.0 - tau2) ** (-(flat.space.d + 1) / 2)


# ---------------------------------------------------------------------------
# Exponential map and isometries


def exp_from_origin(space: SpaceSpec, u, rho):
    """Point at distance ``rho`` from the origin along unit tangent ``u``.

    ``u`` has ``d`` components (tangent space at the origin in all models).
    """
    u = np.asarray(u, dtype=float)
    rho = np.asarray(rho, dtype=float)[..., None]
    if space.kappa == 0:
        return rho * u
    if space.kappa == -1:
        return np.tanh(rho) * u
    pad = np.concatenate([u, np.zeros(u.shape[:-1] + (1,))], axis=-1)
    return np.cos(rho) * space.origin() + np.sin(rho) * pad


def translate_origin_to(x, y):
    """Hyperbolic translation taking the origin to ``x``, applied to ``y`` (BK coordinates)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    gamma = 1.0 / np.sqrt(1.0 - x2)
    xy = np.sum(x * y, axis=-1, keepdims=True)
    num = y + (gamma ** 2 / (gamma + 1.0)) * xy * x + gamma * x
    return num / (gamma * (1.0 + xy))


def exp_map(space: SpaceSpec, x, direction, rho):
    """Geodesic step of length ``rho`` from ``x``.

    ``direction`` is an isotropic random vector: ``d`` components for
    kappa in {0,-1} (used at the origin, then carried to ``x`` by an
    isometry) and ``d+1`` components on the sphere (projected onto the
    tangent space at ``x``). For an isotropic input the output direction is
    uniform on the unit tangent sphere at ``x``.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(direction, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if space.kappa == 0:
        u = g / np.linalg.norm(g, axis=-1, keepdims=True)
        return x + rho[..., None] * u
    if space.kappa == -1:
        u = g / np.linalg.norm(g, axis=-1, keepdims=True)
        return translate_origin_to(x, np.tanh(rho)[..., None] * u)
    t = g - np.sum(g * x, axis=-1, keepdims=True) * x
    t /= np.linalg.norm(t, axis=-1, keepdims=True)
    y = np.cos(rho)[..., None] * x + np.sin(rho)[..., None] * t
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


def random_rotation(space: SpaceSpec, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthogonal map of the ambient space fixing the origin."""
    d = space.d
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if space.kappa == 1:
        full = np.eye(d + 1)
        full[:d, :d] = q
        return full
    return q
