import ast
import math
from pathlib import Path

import numpy as np
import pytest

import rarefall.oracles as oracles
from helpers import fixture_rows
from rarefall.errors import ConfigError
from rarefall.mrc_oracle import mrc_outage_inid_rayleigh
from rarefall.oracles import (
    FixtureRow,
    QuadratureSpec,
    QuadratureToleranceError,
    bisection_eigenvalues,
    erlang_cdf_series,
    kappa_mu_sum_cdf_quad,
    mc_high_effort,
    parse_fixture_line,
    partial_fraction_hypoexp_cdf,
    quad_event_probability,
    read_fixtures,
    series_bessel_i,
    series_marcum_q,
    write_fixtures,
)
from rarefall.scenarios import ExpCorrRayleigh, IidRice, InidRayleigh, OrderedInidRayleigh


def test_oracles_are_independent_of_the_special_function_module():
    tree = ast.parse(Path(oracles.__file__).read_text())
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom):
            imported.add(node.module or "")
        elif isinstance(node, ast.Import):
            imported.update(a.name for a in node.names)
    assert not any("specfun" in m or "mrc_oracle" in m or "sphere_sampler" in m for m in imported)


def test_series_oracles_simple_values():
    assert series_bessel_i(0, 0.0) == 1.0
    assert series_bessel_i(1, 2.0) == pytest.approx(1.5906368546373291, rel=1e-15)
    assert series_marcum_q(1, 0.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-15)
    assert erlang_cdf_series(1, 2.0, 1.0) == pytest.approx(-math.expm1(-0.5), rel=1e-15)


def test_partial_fractions_need_distinct_means():
    with pytest.raises(ValueError):
        partial_fraction_hypoexp_cdf([1.0, 1.0 + 1e-9], 1.0)
    assert partial_fraction_hypoexp_cdf([1.0, 2.0], 1.0) == pytest.approx(
        1 - 2 * math.exp(-0.5) + math.exp(-1.0), rel=1e-14)


def test_bisection_eigenvalues_against_numpy():
    lam = bisection_eigenvalues(1.3, 0.7, 5)
    m = 1.69 * 0.7 ** np.abs(np.subtract.outer(range(5), range(5)))
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(m)[::-1], rtol=1e-12)


# --- quadrature ---------------------------------------------------------------

def test_sphere_quadrature_matches_hypoexponential_form():
    sc = InidRayleigh((1.0, 3.0))
    for g0 in (0.4, 1.0, 2.5):
        res = quad_event_probability(sc, "sphere", g0)
        assert res.converged
        assert abs(res.value - mrc_outage_inid_rayleigh(sc.omegas, g0)) < 1e-8


def test_rice_k_zero_simplex_equals_rayleigh():
    a = quad_event_probability(IidRice(0.0, 2.0, 2), "simplex", 1.2).value
    b = quad_event_probability(InidRayleigh((2.0, 2.0)), "simplex", 1.2).value
    assert abs(a - b) < 1e-9


def test_correlated_rho_zero_equals_independent():
    a = quad_event_probability(ExpCorrRayleigh(1.0, 0.0, 2), "simplex", 1.0).value
    b = quad_event_probability(InidRayleigh((2.0, 2.0)), "simplex", 1.0).value
    assert abs(a - b) < 1e-9


def test_tighter_tolerance_stays_within_bound():
    sc = ExpCorrRayleigh(1.0, 0.5, 2)
    coarse = quad_event_probability(sc, "simplex", 1.0, abs_tol=1e-8)
    fine = quad_event_probability(sc, "simplex", 1.0, abs_tol=5e-9)
    assert abs(coarse.value - fine.value) <= coarse.error_bound + fine.error_bound + 1e-8


def test_strict_quadrature_reports_tolerance_failure():
    with pytest.raises(QuadratureToleranceError):
        quad_event_probability(InidRayleigh((1.0, 2.0)), "simplex", 1.0, abs_tol=1e-300, strict=True)


@pytest.mark.parametrize("kw", [{"dimension": 4, "region": "sphere"}, {"dimension": 2, "region": "cube"}])
def test_quadrature_spec_validation(kw):
    with pytest.raises(ConfigError):
        QuadratureSpec(**kw)


def test_kappa_mu_quadrature_reduces_to_erlang_for_small_k():
    val, err = kappa_mu_sum_cdf_quad(1e-8, 2.0, 3, 1.5)
    assert val == pytest.approx(erlang_cdf_series(3, 2.0, 2.25), rel=1e-6)


# --- brute force MC -----------------------------------------------------------

def test_mc_certain_event_and_errors():
    sc = InidRayleigh((1.0, 2.0))
    assert mc_high_effort(sc, "egc-sum", 1e3, M=1000) == (1.0, 0.0)
    with pytest.raises(ConfigError):
        mc_high_effort(sc, "ordered-partial-sum", 1.0, M=10)
    with pytest.raises(ConfigError):
        mc_high_effort(sc, "max-branch", 1.0, M=10)


def test_mc_ordered_full_selection_events_coincide():
    sc = OrderedInidRayleigh((1.0, 2.0, 3.0), 3)
    a = mc_high_effort(sc, "ordered-partial-sum", 1.3, M=50_000, seed=3)
    b = mc_high_effort(sc, "mrc-sum", 1.3, M=50_000, seed=3)
    assert a == b


def test_mc_agrees_with_closed_form():
    sc = InidRayleigh((1.0, 2.0, 4.0))
    p, se = mc_high_effort(sc, "mrc-sum", 1.0, M=200_000, seed=4)
    assert abs(p - mrc_outage_inid_rayleigh(sc.omegas, 1.0)) < 4 * se


# --- fixture table ------------------------------------------------------------

def test_fixture_round_trip(tmp_path):
    rows = [
        FixtureRow("hypoexp_cdf", {"means": (1.0, 2.0), "t": 0.5}, 0.1, 1e-16, "mpmath-series"),
        FixtureRow("egc_outage", {"scenario": "iid-rice", "K": 3.0, "branches": 4}, 1e-6, 1e-8, "naive-mc"),
    ]
    path = tmp_path / "fx.txt"
    write_fixtures(rows, path)
    assert read_fixtures(path) == rows


def test_bundled_fixtures_parse():
    rows = fixture_rows()
    assert len(rows) >= 30
    assert all(r.error_bound >= 0 and math.isfinite(r.value) for r in rows)


@pytest.mark.parametrize("line", ["bessel_i, nu=0, 1.0", "bessel_i, nu0, 1.0, 0.0, mpmath", "x, a=1, nope, 0, k"])
def test_malformed_fixture_lines(line):
    with pytest.raises(ValueError):
        parse_fixture_line(line)
