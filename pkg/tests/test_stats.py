import math

import numpy as np
import pytest

from poisson_flats.errors import DomainError
from poisson_flats.sampling import RngStream
from poisson_flats.stats import bootstrap_variance_se, empirical_cf, empirical_cumulants, ks_distance, skewness


@pytest.fixture(scope="module")
def normal():
    return RngStream(51).gen.standard_normal(100_000)


def test_ks_examples(normal):
    assert ks_distance(normal) < 0.006
    assert ks_distance(np.zeros(200)) == pytest.approx(0.5)
    assert ks_distance(normal[:1000] + 5) > 0.9
    with pytest.raises(DomainError):
        ks_distance(np.zeros(99))


def test_ks_matches_direct_sup():
    x = np.sort(RngStream(52).gen.standard_normal(500) * 1.3)
    from scipy.special import ndtr
    F = ndtr(x)
    n = len(x)
    direct = max(np.max(np.arange(1, n + 1) / n - F), np.max(F - np.arange(n) / n))
    assert ks_distance(x) == pytest.approx(direct, abs=1e-15)


class TestCumulants:
    def test_normal_third_cumulant(self, normal):
        vals, ses = empirical_cumulants(normal, 4)
        assert abs(vals[2]) < 3 * ses[2]
        assert vals[1] == pytest.approx(1.0, abs=4 * ses[1])
        # the jackknife SE of k2 is close to sqrt(2/n) for normal data
        assert ses[1] == pytest.approx(math.sqrt(2 / len(normal)), rel=0.1)

    def test_shift_and_scale(self, normal):
        x = normal[:20_000]
        base, _ = empirical_cumulants(x, 4)
        shifted, _ = empirical_cumulants(x + 3.5, 4)
        assert shifted[0] == pytest.approx(base[0] + 3.5, abs=1e-10)
        np.testing.assert_allclose(shifted[1:], base[1:], rtol=1e-8, atol=1e-10)
        scaled, _ = empirical_cumulants(2.0 * x, 4)
        np.testing.assert_allclose(scaled, [2 ** l * c for l, c in zip(range(1, 5), base)], rtol=1e-8, atol=1e-12)

    def test_k_statistics_are_unbiased_on_exponential(self):
        # Exp(1): cumulants (l-1)!
        x = RngStream(53).gen.exponential(size=400_000)
        vals, ses = empirical_cumulants(x, 4)
        for v, s, c in zip(vals, ses, (1, 1, 2, 6)):
            assert abs(v - c) < 4 * s

    def test_guards(self):
        with pytest.raises(DomainError):
            empirical_cumulants(np.ones(50), 2)
        with pytest.raises(DomainError):
            empirical_cumulants(np.arange(4.0), 4)
        with pytest.raises(DomainError):
            empirical_cumulants(np.arange(10.0), 5)

    def test_skewness(self):
        g, se = skewness(RngStream(54).gen.exponential(size=200_000))
        assert abs(g - 2.0) < 4 * se


class TestCF:
    def test_examples(self, normal):
        cf = empirical_cf(normal, [0.0, 1.0, -1.0])
        assert cf[0] == 1.0
        n = len(normal)
        assert abs(cf[1] - math.exp(-0.5)) < 3 / math.sqrt(n)
        assert abs(cf[2] - cf[1].conjugate()) < 1e-12

    def test_symmetric_sample(self):
        x = RngStream(55).gen.uniform(-1, 1, 10_000)
        cf = empirical_cf(np.concatenate([x, -x]), [0.7, 3.0])
        assert np.all(np.abs(cf.imag) < 1e-12)
        assert np.all(np.abs(cf) <= 1.0)

    def test_empty(self):
        with pytest.raises(DomainError):
            empirical_cf([], [1.0])


def test_bootstrap_variance_se(normal):
    x = normal[:5000]
    se = bootstrap_variance_se(x, RngStream(56), n_boot=400)
    assert se == pytest.approx(math.sqrt(2 / len(x)), rel=0.15)
    assert bootstrap_variance_se(x, RngStream(56), n_boot=400) == se
