import math

import numpy as np
import pytest
from scipy import stats

from helpers import CORR4, INID4, ORDERED4, RICE4, fixture
from rarefall import sphere_sampler as ss
from rarefall.errors import NumericError, RejectionCapError, TableMismatchError
from rarefall.mrc_oracle import ordered_permutation_table
from rarefall.scenarios import (
    ExpCorrRayleigh,
    IidRice,
    InidRayleigh,
    OrderedInidRayleigh,
    ThresholdSpec,
    gamma0,
)


def rng(seed=0):
    return np.random.default_rng(seed)


# --- uniform simplex ----------------------------------------------------------

def test_simplex_one_dimensional_is_uniform():
    u = ss.sample_uniform_simplex(1, rng(1), size=10**5)[:, 0]
    assert stats.kstest(u, "uniform").pvalue > 0.01


def test_simplex_two_dimensional_area_ratio():
    M = 10**6
    u = ss.sample_uniform_simplex(2, rng(2), size=M)
    frac = np.mean(u.sum(axis=1) <= 0.5)
    assert abs(frac - 0.25) < 3 * math.sqrt(0.25 * 0.75 / M)


def test_simplex_marginal_is_beta_one_l():
    L = 4
    u = ss.sample_uniform_simplex(L, rng(3), size=10**5)
    for i in range(L):
        assert stats.kstest(u[:, i], lambda x: 1 - (1 - x) ** L).pvalue > 0.01


def test_simplex_single_point_shape():
    u = ss.sample_uniform_simplex(3, rng(4))
    assert u.shape == (3,) and u.sum() <= 1 and np.all(u >= 0)


# --- membership and acceptance probabilities ----------------------------------

def _g0(scenario, g_db=-9.0):
    return gamma0(ThresholdSpec(g_db, 1.0), scenario.combined_branches)


def test_samplers_stay_inside_the_sphere():
    n = 10**5
    r, _ = ss.rejection_inid_rayleigh(INID4.omegas, 0.9, rng(5), size=n)
    assert np.all((r * r).sum(axis=1) <= 0.81 * (1 + 1e-15))
    r, _ = ss.rejection_corr_rayleigh(CORR4.sigma, CORR4.rho, 4, 0.9, rng(6), size=n)
    assert np.all((r * r).sum(axis=1) <= 0.81 * (1 + 1e-15))
    r, _ = ss.rejection_iid_rice(RICE4.K, RICE4.omega, 4, 0.9, rng(7), size=n)
    assert np.all((r * r).sum(axis=1) <= 0.81 * (1 + 1e-15))
    table = ordered_permutation_table(ORDERED4.omegas, 2, 0.9)
    h, _ = ss.rejection_ordered(ORDERED4.omegas, 2, 0.9, table, rng(8), size=n)
    assert h.shape == (n, 2)
    assert np.all(h.sum(axis=1) <= 0.81 * (1 + 1e-15))
    assert np.all(np.diff(h, axis=1) <= 0)


@pytest.mark.parametrize("scenario", [INID4, CORR4, RICE4, ORDERED4], ids=lambda s: s.name)
@pytest.mark.parametrize("g_db", [-13.0, -5.0, 1.0])
def test_acceptance_probabilities_in_unit_interval(scenario, g_db):
    g0 = _g0(scenario, g_db)
    u = ss.sample_uniform_simplex(scenario.L, rng(9), size=20000)
    table = perm = None
    if isinstance(scenario, OrderedInidRayleigh):
        table = ordered_permutation_table(scenario.omegas, scenario.N, g0)
        perm = rng(10).integers(0, len(table.weights), size=len(u))
    logacc = ss.log_acceptance(scenario, g0, u, table=table, perm_idx=perm)
    assert np.all(np.isfinite(logacc))
    assert np.all(logacc <= 1e-12)


def test_corr_bessel_argument_bound_at_corner():
    # the numerator Bessel arguments never exceed the denominator argument
    sc = ExpCorrRayleigh(1.0, 0.9, 2)
    u = np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 0.0]])
    assert np.all(ss.log_acceptance(sc, 3.0, u) <= 0)


def test_small_threshold_acceptance_near_one():
    om = INID4.omegas
    g0 = math.sqrt(0.009 * min(om))
    _, stats_ = ss.rejection_inid_rayleigh(om, g0, rng(11), size=20000)
    assert stats_.acceptance_rate > 0.99


# --- degenerate cases --------------------------------------------------------

def test_corr_rho_zero_matches_inid():
    a, _ = ss.rejection_corr_rayleigh(1.2, 0.0, 3, 2.0, rng(12), size=10**5)
    b, _ = ss.rejection_inid_rayleigh([2 * 1.44] * 3, 2.0, rng(13), size=10**5)
    for i in range(3):
        assert stats.ks_2samp(a[:, i], b[:, i]).pvalue > 0.01


def test_rice_k_zero_matches_inid():
    a, _ = ss.rejection_iid_rice(0.0, 1.5, 3, 1.4, rng(14), size=10**5)
    b, _ = ss.rejection_inid_rayleigh([1.5] * 3, 1.4, rng(15), size=10**5)
    for i in range(3):
        assert stats.ks_2samp(a[:, i], b[:, i]).pvalue > 0.01


def test_ordered_single_branch_truncated_exponential():
    om, g0 = 2.0, 1.1
    table = ordered_permutation_table([om], 1, g0)
    h, _ = ss.rejection_ordered([om], 1, g0, table, rng(16), size=10**5)
    cdf = lambda x: np.expm1(-np.asarray(x) / om) / math.expm1(-g0 * g0 / om)
    assert stats.kstest(h[:, 0], cdf).pvalue > 0.01


def test_ordered_table_mismatch():
    table = ordered_permutation_table(ORDERED4.omegas, 2, 0.5)
    with pytest.raises(TableMismatchError):
        ss.rejection_ordered(ORDERED4.omegas, 2, 0.6, table, rng())
    with pytest.raises(TableMismatchError):
        ss.rejection_ordered(ORDERED4.omegas, 3, 0.5, table, rng())


# --- conditional law at two branches -----------------------------------------

TWO_BRANCH = [
    (InidRayleigh((1.0, 1.0)), 1.0, {"scenario": "inid-rayleigh", "omegas": (1.0, 1.0)}),
    (ExpCorrRayleigh(1.0, 0.5, 2), 1.0, {"scenario": "corr-rayleigh", "sigma": 1.0}),
    (IidRice(1.0, 1.0, 2), 0.8, {"scenario": "iid-rice", "K": 1.0}),
    (OrderedInidRayleigh((1.0, 2.0), 2), 1.0, {"scenario": "ordered-rayleigh", "select_n": 2, "omegas": (1.0, 2.0)}),
]


@pytest.mark.parametrize("scenario,g0,key", TWO_BRANCH, ids=lambda x: getattr(x, "name", ""))
def test_conditional_event_probability_matches_quadrature(scenario, g0, key):
    egc = fixture("egc_outage", **key).value
    mrc = fixture("mrc_outage", **key).value
    ratio = egc / mrc
    M = 200_000
    y, ncols, _ = ss.sphere_batch(scenario, g0, M, rng(17))
    frac = np.mean(np.sqrt(y[:, :ncols]).sum(axis=1) <= 1.0)
    assert abs(frac - ratio) < 3 * math.sqrt(ratio * (1 - ratio) / M)


# --- loop mechanics ----------------------------------------------------------

def test_rejection_cap(monkeypatch):
    monkeypatch.setattr(ss, "REJECTION_CAP", 5)
    with pytest.raises(RejectionCapError) as err:
        ss._rejection_loop(3, 2, rng(), lambda u, rows: np.full(len(rows), -800.0))
    assert err.value.accepted == 0 and err.value.proposals >= 15


def test_invalid_acceptance_probability_is_reported():
    with pytest.raises(NumericError):
        ss._rejection_loop(3, 2, rng(), lambda u, rows: np.full(len(rows), 0.5))


def test_rejection_stats():
    s = ss.RejectionStats(10, 4) + ss.RejectionStats(10, 6)
    assert (s.proposals, s.accepted, s.acceptance_rate) == (20, 10, 0.5)
    assert math.isnan(ss.RejectionStats().acceptance_rate)


def test_samplers_are_reproducible():
    a, _ = ss.rejection_iid_rice(3.0, 10.0, 4, 0.8, rng(21), size=500)
    b, _ = ss.rejection_iid_rice(3.0, 10.0, 4, 0.8, rng(21), size=500)
    np.testing.assert_array_equal(a, b)
