import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poisson_flats.errors import DomainError, FrameError
from poisson_flats.geometry import (DEGENERATE, EMPTY, Flat, QuadratureSpec, SpaceSpec, ball_volume,
                                    bk_flat_measure_density, bk_volume_density, cs, distance, exp_from_origin,
                                    exp_map, flat_distance_to_origin, flat_from_foot, intersect_flats, omega,
                                    random_rotation, slice_radius, slice_volume, sn, sn_power_integral)

KAPPAS = (-1, 0, 1)


def _point(space, rng, rmax=1.2):
    u = rng.standard_normal(space.d)
    u /= np.linalg.norm(u)
    rho = rng.uniform(0, min(rmax, 1.4) if space.kappa == 1 else rmax)
    return exp_from_origin(space, u, rho)


class TestTrig:
    def test_sn_examples(self):
        assert sn(0, 2.5) == 2.5
        assert sn(1, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
        assert sn(-1, 1.0) == pytest.approx(1.1752011936438014, rel=1e-15)

    def test_cs_examples(self):
        assert cs(-1, 0.0) == 1.0
        assert cs(0, 7.3) == 1.0
        assert cs(1, math.pi / 3) == pytest.approx(0.5, abs=1e-15)

    def test_sn_rejects_negative(self):
        with pytest.raises(DomainError):
            sn(-1, -0.1)

    def test_omega(self):
        assert omega(1) == pytest.approx(2.0, rel=1e-15)
        assert omega(2) == pytest.approx(2 * math.pi, rel=1e-15)
        assert omega(3) == pytest.approx(4 * math.pi, rel=1e-14)
        # large l stays finite through log-gamma
        assert math.isfinite(omega(20))
        with pytest.raises(DomainError):
            omega(0)

    @pytest.mark.parametrize("kappa", [-1, 1])
    @pytest.mark.parametrize("n", [0, 1, 2, 5])
    def test_sn_power_integral_matches_quad(self, kappa, n):
        q = QuadratureSpec()
        f = np.sinh if kappa == -1 else np.sin
        for a in (0.05, 0.7, 1.3, 1.5):
            ref = q.quad(lambda u: f(u) ** n, 0.0, a)
            assert sn_power_integral(kappa, n, a) == pytest.approx(ref, rel=1e-11, abs=1e-15)


class TestDistance:
    def test_examples(self):
        assert distance(SpaceSpec(-1, 2), [0, 0], [math.tanh(1.0), 0]) == pytest.approx(1.0, rel=1e-13)
        assert distance(SpaceSpec(0, 2), [0, 0], [3, 4]) == 5.0
        sp = SpaceSpec(1, 2)
        assert distance(sp, sp.origin(), sp.origin()) == 0.0

    def test_point_checks(self):
        with pytest.raises(DomainError):
            distance(SpaceSpec(-1, 2), [0, 0], [1.0, 0])
        with pytest.raises(DomainError):
            distance(SpaceSpec(1, 2), [0, 0, 1], [0, 0, 2])
        with pytest.raises(DomainError):
            distance(SpaceSpec(0, 3), [0, 0], [0, 0])

    @given(st.sampled_from(KAPPAS), st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
    def test_metric_axioms(self, kappa, d, seed):
        rng = np.random.default_rng(seed)
        sp = SpaceSpec(kappa, d)
        x, y, z = (_point(sp, rng) for _ in range(3))
        dxy, dyx = distance(sp, x, y), distance(sp, y, x)
        assert dxy == pytest.approx(dyx, abs=1e-12)
        assert distance(sp, x, x) == pytest.approx(0.0, abs=1e-7)
        assert dxy <= distance(sp, x, z) + distance(sp, z, y) + 1e-10

    @given(st.sampled_from(KAPPAS), st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
    def test_rotation_invariance(self, kappa, d, seed):
        rng = np.random.default_rng(seed)
        sp = SpaceSpec(kappa, d)
        x, y = _point(sp, rng), _point(sp, rng)
        Q = random_rotation(sp, rng)
        assert distance(sp, Q @ x, Q @ y) == pytest.approx(distance(sp, x, y), abs=1e-10)

    @given(st.sampled_from(KAPPAS), st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
    def test_exp_map_step_length(self, kappa, d, seed):
        rng = np.random.default_rng(seed)
        sp = SpaceSpec(kappa, d)
        x = _point(sp, rng, rmax=0.7)
        rho = rng.uniform(0.05, 0.7)
        g = rng.standard_normal(sp.ambient_dim)
        y = exp_map(sp, x, g, rho)
        assert distance(sp, x, y) == pytest.approx(rho, rel=1e-8)

    def test_broadcasting(self):
        sp = SpaceSpec(-1, 3)
        rng = np.random.default_rng(0)
        xs = np.array([_point(sp, rng) for _ in range(5)])
        out = distance(sp, xs, sp.origin())
        assert out.shape == (5,)
        assert out[2] == pytest.approx(distance(sp, xs[2], sp.origin()))


class TestVolumes:
    def test_ball_volume_examples(self):
        assert ball_volume(SpaceSpec(0, 2), 1.0) == pytest.approx(math.pi, rel=1e-15)
        # 2 pi (cosh 2 - 1); the frozen figure is the exact closed form
        assert ball_volume(SpaceSpec(-1, 2), 2.0) == pytest.approx(2 * math.pi * (math.cosh(2) - 1), rel=1e-13)
        assert ball_volume(SpaceSpec(-1, 2), 2.0) == pytest.approx(17.355387381771, rel=1e-11)
        assert ball_volume(SpaceSpec(1, 2), math.pi / 2) == pytest.approx(2 * math.pi, rel=1e-14)

    def test_sphere_radius_guard(self):
        with pytest.raises(DomainError):
            ball_volume(SpaceSpec(1, 3), 1.6)

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_ball_volume_against_radial_integral(self, kappa):
        q = QuadratureSpec()
        for d in (2, 3, 5):
            sp = SpaceSpec(kappa, d)
            r = 1.1
            ref = omega(d) * q.quad(lambda s: sn(kappa, s) ** (d - 1), 0, r)
            assert ball_volume(sp, r) == pytest.approx(ref, rel=1e-11)

    def test_slice_volume_examples(self):
        assert slice_volume(SpaceSpec(-1, 2), 1, 3.0, 0.0) == pytest.approx(6.0, rel=1e-13)
        exact = 2 * math.pi * (math.cosh(2) / math.cosh(1) - 1)
        assert slice_volume(SpaceSpec(-1, 3), 2, 2.0, 1.0) == pytest.approx(exact, rel=1e-13)
        assert slice_volume(SpaceSpec(-1, 3), 2, 2.0, 1.0) == pytest.approx(9.035888, rel=1e-6)
        assert slice_volume(SpaceSpec(0, 2), 1, 5.0, 3.0) == pytest.approx(8.0, rel=1e-14)

    def test_slice_volume_j0_convention(self):
        sp = SpaceSpec(0, 2)
        assert slice_volume(sp, 0, 1.0, 0.3) == 1.0
        assert slice_volume(sp, 0, 1.0, 1.0) == 1.0

    @pytest.mark.parametrize("kappa", KAPPAS)
    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_closed_form_matches_quadrature(self, kappa, j):
        sp = SpaceSpec(kappa, 5)
        r = 1.4 if kappa == 1 else 2.5
        s = np.linspace(0, r, 9)[:-1]
        closed = slice_volume(sp, j, r, s)
        quad = slice_volume(sp, j, r, s, method="quad")
        np.testing.assert_allclose(closed, quad, rtol=1e-9)

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_slice_monotone_and_vanishes_at_rim(self, kappa):
        sp = SpaceSpec(kappa, 4)
        r = 1.5 if kappa == 1 else 3.0
        for j in (1, 2, 3):
            v = slice_volume(sp, j, r, np.linspace(0, r, 200))
            assert np.all(np.diff(v) < 0)
            assert v[-1] == 0.0
            assert slice_volume(sp, j, r, r) == 0.0

    def test_slice_distance_guard(self):
        with pytest.raises(DomainError):
            slice_volume(SpaceSpec(0, 3), 2, 1.0, 1.5)

    def test_sphere_slice_radius(self):
        # the section of a cap of radius r by a great circle at distance s has cos(rho) = cos r / cos s
        r, s = 1.2, 0.5
        assert math.cos(slice_radius(1, r, s)) == pytest.approx(math.cos(r) / math.cos(s), rel=1e-13)

    @pytest.mark.parametrize("j", [1, 2])
    def test_bk_slice_volume_by_euclidean_integration(self, j):
        """Hyperbolic section volume from the Beltrami-Klein density on the Euclidean chord or disk."""
        q = QuadratureSpec()
        d = j + 1
        sp = SpaceSpec(-1, d)
        r, s = 1.7, 0.6
        u = np.zeros(d)
        u[0] = 1.0
        V = np.eye(d)[1:j + 1]
        flat = flat_from_foot(sp, j, u, s, V)
        tau2 = math.tanh(s) ** 2
        L = math.sqrt(math.tanh(r) ** 2 - tau2)

        def dens(rho):
            x = flat.foot + rho * V[0]
            return bk_volume_density(flat, x)

        if j == 1:
            val = 2 * q.quad(dens, 0, L)
        else:
            val = 2 * math.pi * q.quad(lambda rho: dens(rho) * rho, 0, L)
        assert val == pytest.approx(slice_volume(sp, j, r, s), rel=1e-6)


class TestFlats:
    def test_flat_from_foot_euclidean(self):
        f = flat_from_foot(SpaceSpec(0, 2), 1, [1, 0], 2.0, [[0, 1]])
        np.testing.assert_allclose(f.foot, [2, 0])
        assert f.contains([2, 5.0]) and not f.contains([1.9, 0])

    def test_flat_from_foot_klein(self):
        f = flat_from_foot(SpaceSpec(-1, 2), 1, [1, 0], 2.0, [[0, 1]])
        np.testing.assert_allclose(f.foot, [math.tanh(2), 0], rtol=1e-15)
        assert f.contains([math.tanh(2), 0.1])

    def test_flat_from_foot_sphere_through_pole(self):
        sp = SpaceSpec(1, 2)
        f = flat_from_foot(sp, 1, [1, 0, 0], 0.0, [[0, 1, 0]])
        assert f.contains(sp.origin())
        assert f.contains([0, 1, 0])
        assert not f.contains([1, 0, 0])
        assert flat_distance_to_origin(f) == 0.0

    def test_distance_to_origin_examples(self):
        sp = SpaceSpec(-1, 2)
        f = Flat(sp, 1, [math.tanh(1.5), 0], [[0, 1]])
        assert flat_distance_to_origin(f) == pytest.approx(1.5, rel=1e-13)
        g = Flat(SpaceSpec(0, 3), 2, [0, 0, 4], [[1, 0, 0], [0, 1, 0]])
        assert flat_distance_to_origin(g) == 4.0

    @pytest.mark.parametrize("s", [0.2, 0.9, 1.5])
    def test_sphere_distance_roundtrip(self, s):
        sp = SpaceSpec(1, 3)
        f = flat_from_foot(sp, 2, [1, 0, 0, 0], s, [[0, 1, 0, 0], [0, 0, 1, 0]])
        assert flat_distance_to_origin(f) == pytest.approx(s, abs=1e-12)

    def test_frame_validation(self):
        with pytest.raises(FrameError):
            Flat(SpaceSpec(0, 2), 1, [0, 0], [[1, 1]])
        with pytest.raises(FrameError):
            Flat(SpaceSpec(0, 2), 1, [1, 0], [[1, 0]])
        with pytest.raises(DomainError):
            Flat(SpaceSpec(-1, 2), 1, [1.2, 0], [[0, 1]])
        with pytest.raises(DomainError):
            Flat(SpaceSpec(0, 2), 2, [0, 0], np.eye(2))

    def test_flat_is_immutable(self):
        f = flat_from_foot(SpaceSpec(0, 2), 1, [1, 0], 1.0, [[0, 1]])
        with pytest.raises(ValueError):
            f.foot[0] = 3.0


class TestIntersections:
    def test_two_lines_meet_in_point(self):
        sp = SpaceSpec(0, 2)
        a = Flat(sp, 1, [1, 0], [[0, 1]])
        b = Flat(sp, 1, [0, 1], [[1, 0]])
        p = intersect_flats(sp, [a, b])
        assert p.k == 0
        np.testing.assert_allclose(p.foot, [1, 1], atol=1e-14)

    def test_klein_chords_meeting_outside(self):
        sp = SpaceSpec(-1, 2)
        a = Flat(sp, 1, [0.9, 0], [[0, 1]])
        b = Flat(sp, 1, [0, 0.9], [[1, 0]])
        assert intersect_flats(sp, [a, b]) is EMPTY

    def test_identical_lines_degenerate(self):
        sp = SpaceSpec(0, 2)
        a = Flat(sp, 1, [1, 0], [[0, 1]])
        assert intersect_flats(sp, [a, a]) is DEGENERATE

    def test_parallel_euclidean_lines_degenerate(self):
        sp = SpaceSpec(0, 2)
        a = Flat(sp, 1, [1, 0], [[0, 1]])
        b = Flat(sp, 1, [2, 0], [[0, 1]])
        assert intersect_flats(sp, [a, b]) is DEGENERATE

    def test_sphere_great_circles(self):
        sp = SpaceSpec(1, 2)
        a = flat_from_foot(sp, 1, [1, 0, 0], 0.4, [[0, 1, 0]])
        b = flat_from_foot(sp, 1, [0, 1, 0], 0.3, [[1, 0, 0]])
        p = intersect_flats(sp, [a, b])
        assert p.k == 0
        assert a.contains(p.foot) and b.contains(p.foot)
        assert p.foot[-1] >= 0  # the representative nearest the pole

    def test_planes_in_three_space(self):
        sp = SpaceSpec(-1, 3)
        rng = np.random.default_rng(7)
        flats = []
        for _ in range(3):
            Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
            flats.append(flat_from_foot(sp, 2, Q[:, 0], 0.2, Q[:, 1:].T))
        line = intersect_flats(sp, flats[:2])
        assert line.k == 1
        for f in flats[:2]:
            assert f.contains(line.foot, tol=1e-10)
            assert f.contains(line.foot + 0.1 * line.frame[0], tol=1e-10)
        pt = intersect_flats(sp, flats)
        assert pt.k == 0 and all(f.contains(pt.foot, tol=1e-10) for f in flats)


class TestKleinDensities:
    def test_volume_density_examples(self):
        sp = SpaceSpec(-1, 3)
        line = Flat(sp, 1, [0, 0, 0], [[1, 0, 0]])
        assert bk_volume_density(line, [0, 0, 0]) == 1.0
        assert bk_volume_density(line, [0.6, 0, 0]) == pytest.approx(1.5625, rel=1e-14)
        plane = Flat(sp, 2, [0.6, 0, 0], [[0, 1, 0], [0, 0, 1]])
        assert bk_volume_density(plane, [0.6, 0, 0]) == pytest.approx(1.5625, rel=1e-14)

    def test_flat_measure_density_examples(self):
        assert bk_flat_measure_density(Flat(SpaceSpec(-1, 2), 1, [0, 0], [[1, 0]])) == 1.0
        assert bk_flat_measure_density(Flat(SpaceSpec(-1, 2), 1, [0.8, 0], [[0, 1]])) == pytest.approx(
            0.36 ** -1.5, rel=1e-14)
        assert bk_flat_measure_density(Flat(SpaceSpec(-1, 3), 2, [0.5, 0, 0], [[0, 1, 0], [0, 0, 1]])) == (
            pytest.approx(0.75 ** -2, rel=1e-14))

    def test_klein_only(self):
        with pytest.raises(DomainError):
            bk_volume_density(Flat(SpaceSpec(0, 2), 1, [0, 0], [[1, 0]]), [0, 0])
