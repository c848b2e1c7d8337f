"""Non-Gaussian limit of the rescaled total k-volume for 2k > d+1 (hyperbolic space).

The limit variable is a compensated Poisson sum
``Z = sum_{s in zeta} cosh^{-(k-1)} s - compensator`` over the inhomogeneous
Poisson process ``zeta`` with intensity ``lam(s) = omega_{d-k} cosh^k s sinh^{d-k-1} s``.
Its cumulants, characteristic function and Levy density are available in
closed form or by one-dimensional quadrature; samples are drawn with a hybrid
scheme (see :func:`compensated_poisson_sum`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ResourceError
from .geometry import DEFAULT_QUAD, QuadratureSpec, _slice_volume, log_omega, omega
from .sampling import DEFAULT_CAP, _gen, radial_sampler

__all__ = [
    "LimitSpec", "proof_constant", "stated_constant", "g_profile", "g_r_profile",
    "zeta_intensity", "cumulant_Z", "levy_density", "psi_limit", "log_psi_limit", "psi_Z",
    "psi_r", "log_psi_r",
    "HybridPlan", "plan_hybrid", "compensated_poisson_sum", "sample_Z", "sample_rescaled_F",
]

_CHUNK = 2_000_000


def _check_regime(d: int, k: int):
    if d < 4 or not 3 <= k <= d - 1 or 2 * k <= d + 1:
        raise DomainError(f"(d, k) = ({d}, {k}) is outside the regime d >= 4, 3 <= k <= d-1, 2k > d+1")


@dataclass(frozen=True)
class LimitSpec:
    d: int
    k: int
    T: float = 12.0

    def __post_init__(self):
        _check_regime(self.d, self.k)
        if not self.T > 0:
            raise DomainError("truncation height must be positive")


def proof_constant(k: int) -> float:
    """omega_k / ((k-1) 2^(k-1)), the value of g at 0."""
    return math.exp(log_omega(k) - math.log(k - 1) - (k - 1) * math.log(2.0))


def stated_constant(k: int) -> float:
    """omega_k / ((k-1) 2^(k-2)), twice :func:`proof_constant`."""
    return 2.0 * proof_constant(k)


def g_profile(d: int, k: int, s):
    s = np.asarray(s, dtype=float)
    out = proof_constant(k) * np.cosh(s) ** (-(k - 1))
    return out if out.ndim else float(out)


def g_r_profile(d: int, k: int, r: float, s, quad: QuadratureSpec | None = None):
    """Slice k-volume of a hyperbolic r-ball at distance s, divided by e^{r(k-1)}."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > r):
        raise DomainError("need 0 <= s <= r")
    out = _slice_volume(-1, k, r, s) * math.exp(-r * (k - 1))
    return out if np.ndim(out) else float(out)


def _log_cosh(s):
    s = np.abs(s)
    return s + np.log1p(np.exp(-2.0 * s)) - math.log(2.0)


def _log_sinh(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        return s + np.log(-np.expm1(-2.0 * s)) - math.log(2.0)


def zeta_intensity(d: int, k: int, s):
    s = np.asarray(s, dtype=float)
    lw = k * _log_cosh(s)
    if d - k - 1:
        lw = lw + (d - k - 1) * _log_sinh(s)
    return omega(d - k) * np.exp(lw)


def _power_weight(a: float, b: int, s):
    """cosh^a sinh^b evaluated in log space."""
    lw = a * _log_cosh(s)
    if b:
        lw = lw + b * _log_sinh(s)
    return np.exp(lw)


def cumulant_Z(d: int, k: int, l: int, quad: QuadratureSpec | None = None,
               method: str = "gamma") -> float:
    """l-th cumulant of Z.

    ``method`` selects the closed Beta-function form ("gamma"), quadrature of
    the defining half-line integral ("quad") or the l-th moment of the Levy
    density ("levy"); the three agree to quadrature accuracy.
    """
    if l < 2:
        raise DomainError("cumulants are defined here for l >= 2")
    if 2 * k <= d + 1 or k < 2:
        raise DomainError("the cumulant integral diverges outside 2k > d+1")
    a, b = k - l * (k - 1), d - k - 1
    if method == "gamma":
        return math.exp(log_omega(d - k) - math.log(2.0) + gammaln(-(a + b) / 2)
                        + gammaln((b + 1) / 2) - gammaln((1 - a) / 2))
    q = quad or DEFAULT_QUAD
    if method == "quad":
        return omega(d - k) * q.quad(lambda s: _power_weight(a, b, s), 0.0, np.inf, limit=200)
    if method == "levy":
        return _levy_moment(d, k, l, q)
    raise DomainError(f"unknown method {method!r}")


def levy_density(d: int, k: int, y):
    y = np.asarray(y, dtype=float)
    if np.any((y <= 0) | (y >= 1)):
        raise DomainError("the Levy density lives on (0, 1)")
    out = (omega(d - k) / (k - 1) * y ** (-(d + k - 2) / (k - 1))
           * (1.0 - y ** (2.0 / (k - 1))) ** ((d - k) / 2 - 1))
    return out if out.ndim else float(out)


def _levy_moment(d: int, k: int, l: int, q: QuadratureSpec) -> float:
    # y^l rho(y) = C y^alpha (1-y)^beta h(y)^beta with h smooth and positive on [0, 1]
    c = 2.0 / (k - 1)
    alpha = l - (d + k - 2) / (k - 1)
    beta = (d - k) / 2 - 1

    def h_pow(y):
        y = np.asarray(y, dtype=float)
        ly = np.log(np.maximum(y, 1e-300))
        with np.errstate(invalid="ignore", divide="ignore"):
            h = np.where(y < 1.0, np.expm1(c * ly) / np.expm1(ly), c)
        h = np.where(y <= 0.0, 1.0, h)
        return h ** beta

    val = q.quad(h_pow, 0.0, 1.0, weight="alg", wvar=(alpha, beta), limit=200)
    return omega(d - k) / (k - 1) * val


# ---------------------------------------------------------------------------
# Characteristic functions


def _expm1_i(x):
    """(cos x - 1, sin x - x) without cancellation for small |x|."""
    x = np.asarray(x, dtype=float)
    re = -2.0 * np.sin(0.5 * x) ** 2
    small = np.abs(x) < 0.5
    x2 = x * x
    series = -x * x2 / 6.0 * (1 - x2 / 20.0 * (1 - x2 / 42.0 * (1 - x2 / 72.0 * (1 - x2 / 110.0 * (1 - x2 / 156.0)))))
    im = np.where(small, series, np.sin(x) - x)
    return re, im


def _cf_exponent(d, k, h: Callable, upper: float, xi: float, q: QuadratureSpec) -> complex:
    """int_0^upper (e^{i xi h} - 1 - i xi h) lam ds, split at half periods of cos(xi h)."""
    grid = np.linspace(0.0, upper, 4097)
    hv = xi * np.asarray(h(grid))
    nmax = int(abs(hv[0]) / math.pi)
    cuts = [0.0]
    if nmax:
        levels = math.pi * np.arange(1, min(nmax, 4000) + 1)
        # |xi h| decreases in s, so reverse for interpolation
        cuts += sorted(np.interp(levels, np.abs(hv)[::-1], grid[::-1]).tolist())
    cuts.append(upper)

    def re_f(s):
        return _expm1_i(xi * h(s))[0] * zeta_intensity(d, k, s)

    def im_f(s):
        return _expm1_i(xi * h(s))[1] * zeta_intensity(d, k, s)

    re, im = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            re.append(q.quad(re_f, a, b, limit=200))
            im.append(q.quad(im_f, a, b, limit=200))
    return complex(math.fsum(re), math.fsum(im))


def _truncation(d: int, k: int, xi: float, abs_tol: float) -> float:
    """Height S beyond which the integrand envelope xi^2 g^2 lam / 2 stays below abs_tol."""
    c = proof_constant(k)

    def log_env(s):
        return (2 * math.log(abs(xi) * c) - 2 * (k - 1) * float(_log_cosh(s))
                + math.log(float(zeta_intensity(d, k, s))) - math.log(2.0))

    target = math.log(abs_tol)
    lo, hi = 1.0, 2.0
    while log_env(hi) > target:
        hi *= 2.0
        if hi > 1e4:
            raise DomainError("no truncation height reaches the requested tolerance")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if log_env(mid) > target else (lo, mid)
    return hi


def log_psi_limit(d: int, k: int, xi: float, quad: QuadratureSpec | None = None) -> complex:
    """Logarithm of :func:`psi_limit`; finite even where the modulus underflows."""
    _check_regime(d, k)
    if xi == 0:
        return complex(0.0, 0.0)
    q = quad or DEFAULT_QUAD
    S = _truncation(d, k, xi, q.abs_tol)
    return _cf_exponent(d, k, lambda s: g_profile(d, k, s), S, xi, q)


def psi_limit(d: int, k: int, xi: float, quad: QuadratureSpec | None = None) -> complex:
    """Characteristic function of the limit of (F_r - E F_r)/e^{r(k-1)}, which is c_k Z."""
    return complex(np.exp(log_psi_limit(d, k, xi, quad)))


def psi_Z(d: int, k: int, xi: float, quad: QuadratureSpec | None = None) -> complex:
    """Characteristic function of Z itself, psi_limit(xi / c_k)."""
    return psi_limit(d, k, xi / proof_constant(k), quad)


def log_psi_r(d: int, k: int, r: float, xi: float, quad: QuadratureSpec | None = None) -> complex:
    if not r > 0:
        raise DomainError("r must be positive")
    if xi == 0:
        return complex(0.0, 0.0)
    q = quad or DEFAULT_QUAD
    return _cf_exponent(d, k, lambda s: g_r_profile(d, k, r, np.clip(s, 0.0, r)), r, xi, q)


def psi_r(d: int, k: int, r: float, xi: float, quad: QuadratureSpec | None = None) -> complex:
    """Characteristic function of (F_r - E F_r) / e^{r(k-1)} (t = 1, m = 1)."""
    return complex(np.exp(log_psi_r(d, k, r, xi, quad)))


# ---------------------------------------------------------------------------
# Simulation of compensated Poisson sums


@dataclass(frozen=True)
class HybridPlan:
    """Split of [0, upper] into an exactly simulated part [0, s0] and a tail.

    The tail contribution (a compensated Poisson sum with many small jumps)
    is replaced by a centred Gamma variable with the tail's exact second and
    third cumulants; ``tail_cumulants`` holds the tail's cumulants 2..4.
    """

    s0: float
    upper: float
    exact_mass: float
    exact_mean: float
    tail_cumulants: tuple

    @property
    def exact(self) -> bool:
        return self.s0 >= self.upper


def _moment(d, k, h, a, b, power, q):
    if b <= a:
        return 0.0
    pts = [x for x in (a + 1.0, a + 3.0) if x < b]
    return q.quad(lambda s: h(s) ** power * zeta_intensity(d, k, s), a, b, points=pts or None, limit=200)


def plan_hybrid(d: int, k: int, h: Callable, upper: float, tail_tol: float = 1e-4,
                quad: QuadratureSpec | None = None, mean_exact: Callable | None = None) -> HybridPlan:
    """Choose s0 so that the tail's fourth cumulant is at most ``tail_tol`` of the total."""
    q = quad or DEFAULT_QUAD
    total4 = _moment(d, k, h, 0.0, upper, 4, q)
    if tail_tol <= 0 or total4 == 0:
        s0 = upper
    else:
        lo, hi = 0.0, upper
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if _moment(d, k, h, mid, upper, 4, q) > tail_tol * total4:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-4:
                break
        s0 = hi
    mass = omega(d - k) * radial_sampler(-1, d, k, float(s0)).total if s0 > 0 else 0.0
    mean = mean_exact(s0) if mean_exact is not None else _moment(d, k, h, 0.0, s0, 1, q)
    tail = tuple(_moment(d, k, h, s0, upper, p, q) for p in (2, 3, 4))
    return HybridPlan(float(s0), float(upper), float(mass), float(mean), tail)


def compensated_poisson_sum(d: int, k: int, h: Callable, plan: HybridPlan, size: int, rng,
                            cap: int = DEFAULT_CAP) -> np.ndarray:
    """``size`` draws of sum_{s in zeta, s <= upper} h(s) minus its mean."""
    g = _gen(rng)
    if plan.exact_mass > cap:
        raise ResourceError(f"expected {plan.exact_mass:.3g} points per draw exceeds the cap {cap}")
    counts = g.poisson(plan.exact_mass, size) if plan.s0 > 0 else np.zeros(size, dtype=np.int64)
    sampler = radial_sampler(-1, d, k, float(plan.s0)) if plan.s0 > 0 else None
    out = np.zeros(size)
    owner = np.repeat(np.arange(size), counts)
    for a in range(0, len(owner), _CHUNK):
        idx = owner[a:a + _CHUNK]
        pts = sampler.sample(g, len(idx))
        out += np.bincount(idx, weights=h(pts), minlength=size)
    out -= plan.exact_mean
    k2, k3, _ = plan.tail_cumulants
    if k2 > 0:
        if k3 > 1e-12 * k2 ** 1.5:
            theta = k3 / (2.0 * k2)
            shape = k2 / theta ** 2
            out += theta * (g.gamma(shape, size=size) - shape)
        else:
            out += math.sqrt(k2) * g.standard_normal(size)
    return out


def sample_Z(spec: LimitSpec, rng, quad: QuadratureSpec | None = None, size: int | None = None,
             tail_tol: float = 1e-4) -> np.ndarray | float:
    """Draws of the limit variable truncated at height ``spec.T``.

    ``tail_tol=0`` simulates every point of zeta on [0, T] (feasible only for
    small T).
    """
    d, k, T = spec.d, spec.k, spec.T

    def h(s):
        return np.exp(-(k - 1) * _log_cosh(s))

    def mean_exact(s0):
        return omega(d - k) / (d - k) * math.sinh(s0) ** (d - k)

    plan = plan_hybrid(d, k, h, T, tail_tol, quad, mean_exact)
    n = 1 if size is None else int(size)
    out = compensated_poisson_sum(d, k, h, plan, n, rng)
    return float(out[0]) if size is None else out


def sample_rescaled_F(d: int, k: int, r: float, rng, size: int, quad: QuadratureSpec | None = None,
                      tail_tol: float = 1e-4) -> np.ndarray:
    """Draws of (F_r - E F_r) / e^{r(k-1)} for the hyperbolic k-flat process at t = 1.

    F_r depends on the flats only through their distances to the origin, which
    form a Poisson process with intensity :func:`zeta_intensity` on [0, r].
    """
    if k < 2 or not r > 0:
        raise DomainError("need k >= 2 and r > 0")

    def h(s):
        return g_r_profile(d, k, r, np.clip(s, 0.0, r))

    plan = plan_hybrid(d, k, h, r, tail_tol, quad)
    return compensated_poisson_sum(d, k, h, plan, int(size), rng)
