import math

import mpmath
import numpy as np
import pytest

from hellinger_invariant.errors import DomainError
from hellinger_invariant.stats_core import NormalTarget, erfc_nonneg, normal_cdf, sample_mean_cov


def test_cdf_at_mean():
    assert normal_cdf(0.0, 0.0, 1.0) == 0.5


def test_cdf_quantile_975():
    # mpmath quadrature of the standard normal density up to 1.959963985
    # gives 0.97500000002688156...
    mu, s2 = 0.3, 2.5
    x = mu + 1.959963985 * math.sqrt(s2)
    assert normal_cdf(x, mu, s2) == pytest.approx(0.975, abs=1e-9)
    assert normal_cdf(x, mu, s2) == pytest.approx(0.9750000000268815623, abs=1e-12)


def test_cdf_far_tail():
    assert normal_cdf(-40.0, 0.0, 1.0) < 1e-300 or normal_cdf(-40.0, 0.0, 1.0) == 0.0


def test_cdf_against_high_precision_reference():
    mpmath.mp.dps = 30
    rng = np.random.default_rng(0)
    z = np.concatenate([rng.uniform(-9, 9, 400), np.linspace(-8.6, 8.6, 173)])
    ours = normal_cdf(z)
    ref = np.array([float(mpmath.ncdf(v)) for v in z])
    assert np.abs(ours - ref).max() <= 1e-12


def test_erfc_segments_against_mpmath():
    mpmath.mp.dps = 30
    u = np.linspace(0, 6.5, 1301)
    ref = np.array([float(mpmath.erfc(v)) for v in u])
    assert np.abs(erfc_nonneg(u) - ref).max() < 1e-14


@pytest.mark.parametrize("seed", range(200))
def test_cdf_reflection_symmetry(seed):
    rng = np.random.default_rng(seed)
    mu, s2 = rng.normal(0, 3), rng.uniform(0.01, 10)
    x = rng.normal(mu, 3 * math.sqrt(s2), 20)
    np.testing.assert_allclose(normal_cdf(x, mu, s2) + normal_cdf(2 * mu - x, mu, s2), 1.0, atol=1e-12, rtol=0)


def test_cdf_monotone():
    x = np.linspace(-12, 12, 200001)
    assert np.all(np.diff(normal_cdf(x)) >= 0)


def test_cdf_rejects_bad_variance():
    with pytest.raises(DomainError):
        normal_cdf(0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        NormalTarget(0.0, -1.0)


def test_two_point_moments():
    mean, cov = sample_mean_cov(np.array([[0.0], [0.2]]))
    assert mean[0] == pytest.approx(0.1)
    assert cov[0, 0] == pytest.approx(0.02)


def test_duplicated_columns_have_equal_cov_block():
    x = np.random.default_rng(1).normal(size=(50, 1))
    _, cov = sample_mean_cov(np.hstack([x, x]))
    assert cov[0, 0] == cov[0, 1] == cov[1, 0] == cov[1, 1]


def test_moments_match_two_pass_oracle(student_market):
    x = student_market.returns
    T, n = x.shape
    mean, cov = sample_mean_cov(student_market)
    ref_mean = [math.fsum(x[:, j]) / T for j in range(n)]
    ref_cov = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ref_cov[i, j] = math.fsum((x[:, i] - ref_mean[i]) * (x[:, j] - ref_mean[j])) / (T - 1)
    np.testing.assert_allclose(mean, ref_mean, atol=1e-12, rtol=0)
    np.testing.assert_allclose(cov, ref_cov, atol=1e-12, rtol=1e-12)


@pytest.mark.parametrize("seed", range(200))
def test_covariance_psd(seed):
    rng = np.random.default_rng(seed)
    T, n = int(rng.integers(2, 30)), int(rng.integers(1, 8))
    _, cov = sample_mean_cov(rng.standard_t(3, (T, n)))
    np.testing.assert_array_equal(cov, cov.T)
    assert np.linalg.eigvalsh(cov).min() >= -1e-10


def test_moments_need_two_rows():
    with pytest.raises(DomainError):
        sample_mean_cov(np.zeros((1, 3)))
