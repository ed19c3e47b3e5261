import math

import numpy as np
import pytest
from scipy import stats

from helpers import SQRT5, fixture, fixture_rows
from rarefall.errors import ConfigError, ConvergenceError
from rarefall.scenarios import (
    ExpCorrRayleigh,
    IidRice,
    InidRayleigh,
    OrderedInidRayleigh,
    ThresholdSpec,
    _ar1_gaussian,
    build_scenario,
    db_to_linear,
    exp_corr_eigenvalues,
    gamma0,
    jacobi_eigenvalues,
    sample_naive,
    sample_naive_batch,
    threshold_g0,
)


def test_gamma0_examples():
    assert gamma0(ThresholdSpec(0.0, 0.0), 4) == pytest.approx(2.0, rel=1e-15)
    assert gamma0(ThresholdSpec(0.0, 0.0), 1) == pytest.approx(1.0, rel=1e-15)
    assert gamma0(ThresholdSpec(-9.0, 1.0), 4) == pytest.approx(2.0 * 10 ** (-10 / 20), rel=1e-15)
    row = fixture("gamma0", n=4)
    assert gamma0(ThresholdSpec(-9.0, 1.0), 4) == pytest.approx(row.value, rel=1e-14)


def test_gamma0_monotonicity():
    g = [gamma0(ThresholdSpec(x, 1.0), 4) for x in np.arange(-20, 10, 0.5)]
    assert np.all(np.diff(g) > 0)
    assert gamma0(ThresholdSpec(0, 1.0), 5) > gamma0(ThresholdSpec(0, 1.0), 4)
    assert gamma0(ThresholdSpec(0, 2.0), 4) < gamma0(ThresholdSpec(0, 1.0), 4)


def test_threshold_uses_combined_branches():
    sc = OrderedInidRayleigh((1.0, 2.0, 3.0, 4.0), 2)
    assert threshold_g0(sc, ThresholdSpec(0.0, 0.0)) == pytest.approx(math.sqrt(2.0))
    assert threshold_g0(sc, 0.7) == 0.7
    with pytest.raises(ConfigError):
        threshold_g0(sc, -1.0)


def test_threshold_spec_rejects_non_finite():
    with pytest.raises(ConfigError):
        ThresholdSpec(math.nan, 1.0)


@pytest.mark.parametrize("make", [
    lambda: InidRayleigh(()),
    lambda: InidRayleigh((1.0, -2.0)),
    lambda: InidRayleigh((1.0,) * 17),
    lambda: ExpCorrRayleigh(1.0, 1.0, 3),
    lambda: ExpCorrRayleigh(1.0, -0.1, 3),
    lambda: ExpCorrRayleigh(0.0, 0.5, 3),
    lambda: IidRice(-1.0, 1.0, 2),
    lambda: IidRice(1.0, 1.0, 0),
    lambda: OrderedInidRayleigh((1.0, 2.0), 3),
    lambda: OrderedInidRayleigh((1.0, 2.0), 0),
])
def test_invalid_scenarios(make):
    with pytest.raises(ConfigError):
        make()


def test_build_scenario_by_name():
    assert build_scenario("inid-rayleigh", omegas=[1.0, 2.0]) == InidRayleigh((1.0, 2.0))
    assert build_scenario("ordered-rayleigh", omegas=3.0, select_n=1).L == 1
    assert build_scenario("iid-rice", K=1, omega=2, branches=3) == IidRice(1.0, 2.0, 3)
    with pytest.raises(ConfigError, match="needs rho"):
        build_scenario("corr-rayleigh", sigma=1.0, branches=2)
    with pytest.raises(ConfigError):
        build_scenario("nakagami")


def test_db_to_linear():
    np.testing.assert_allclose(db_to_linear([0, 10, -10]), [1.0, 10.0, 0.1])


# --- naive samplers ---------------------------------------------------------

def test_inid_rayleigh_second_moments():
    omegas = (0.5, 1.0, 10.0)
    r = sample_naive_batch(InidRayleigh(omegas), 10**6, np.random.default_rng(1))
    assert np.all(r >= 0)
    np.testing.assert_allclose((r * r).mean(axis=0), omegas, rtol=0.01)


def test_rice_second_moment_and_k_zero_reduction():
    rng = np.random.default_rng(2)
    r = sample_naive_batch(IidRice(3.0, 10.0, 2), 10**6, rng)
    np.testing.assert_allclose((r * r).mean(axis=0), 10.0, rtol=0.01)
    rice0 = sample_naive_batch(IidRice(0.0, 2.0, 1), 10**5, rng)[:, 0]
    ray = sample_naive_batch(InidRayleigh((2.0,)), 10**5, rng)[:, 0]
    assert stats.ks_2samp(rice0, ray).pvalue > 0.01


def test_rice_envelope_matches_rice_law():
    K, omega = 2.0, 3.0
    r = sample_naive_batch(IidRice(K, omega, 1), 10**5, np.random.default_rng(4))[:, 0]
    s = math.sqrt(omega / (2 * (K + 1)))
    nu = math.sqrt(K * omega / (K + 1))
    assert stats.kstest(r, stats.rice(nu / s, scale=s).cdf).pvalue > 0.01


def test_correlated_rho_zero_is_uncorrelated():
    r = sample_naive_batch(ExpCorrRayleigh(1.0, 0.0, 2), 10**6, np.random.default_rng(5))
    h = r * r
    assert abs(np.corrcoef(h[:, 0], h[:, 1])[0, 1]) < 0.01


def test_ar1_covariance_within_three_standard_errors():
    sigma, rho, L, M = SQRT5, 0.5, 4, 10**6
    x = _ar1_gaussian(sigma, rho, L, M, np.random.default_rng(6))
    emp = x.T @ x / M
    for i in range(L):
        for j in range(L):
            target = sigma**2 * rho ** abs(i - j)
            # var(X_i X_j) = sigma^4 (1 + rho^(2|i-j|)) for a zero-mean Gaussian pair
            se = math.sqrt(sigma**4 * (1 + rho ** (2 * abs(i - j))) / M)
            assert abs(emp[i, j] - target) < 3 * se


def test_correlated_envelope_power():
    r = sample_naive_batch(ExpCorrRayleigh(SQRT5, 0.5, 4), 10**6, np.random.default_rng(7))
    np.testing.assert_allclose((r * r).mean(axis=0), 2 * 5.0, rtol=0.01)


def test_ordered_samples_are_sorted():
    sc = OrderedInidRayleigh((1.0, 5.0, 2.0, 8.0), 2)
    r = sample_naive_batch(sc, 10**4, np.random.default_rng(8))
    assert np.all(np.diff(r, axis=1) <= 0)
    one = sample_naive(sc, np.random.default_rng(8))
    assert one.shape == (4,) and np.all(np.diff(one) <= 0)


# --- eigenvalues ------------------------------------------------------------

def test_eigenvalues_trivial_cases():
    np.testing.assert_array_equal(exp_corr_eigenvalues(2.0, 0.0, 3), [4.0, 4.0, 4.0])
    np.testing.assert_allclose(exp_corr_eigenvalues(1.5, 0.4, 2), [2.25 * 1.4, 2.25 * 0.6], rtol=1e-14)


def test_eigenvalues_against_bisection_fixture():
    lam = exp_corr_eigenvalues(SQRT5, 0.5, 4)
    for row in fixture_rows("corr_eigenvalue"):
        assert lam[row.inputs["index"]] == pytest.approx(row.value, rel=1e-12)


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.9, 0.99])
@pytest.mark.parametrize("L", [1, 3, 6, 16])
def test_eigenvalues_positive_sorted_trace(rho, L):
    lam = exp_corr_eigenvalues(1.3, rho, L)
    assert np.all(lam > 0)
    assert np.all(np.diff(lam) <= 0)
    assert lam.sum() == pytest.approx(L * 1.69, rel=1e-12)
    np.testing.assert_allclose(np.sort(lam), np.linalg.eigvalsh(1.69 * rho ** np.abs(np.subtract.outer(range(L), range(L)))),
                               rtol=1e-11)


def test_jacobi_reports_non_convergence():
    a = np.array([[1.0, 0.5], [0.5, 2.0]])
    with pytest.raises(ConvergenceError):
        jacobi_eigenvalues(a, tol=1e-13, max_sweeps=0)
