"""Fixture comparisons and invariant checks behind ``rarefall validate``.

Each check reports the absolute deviation it measured and the largest
deviation it allows. Deterministic fixtures (series, partial fractions,
quadrature) get tight relative bounds; stochastic ones get three combined
standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend, specfun
from .errors import RarefallError
from .estimators import estimate_sphere_is
from .mrc_oracle import box_probability, sphere_probability
from .oracles import default_fixture_path, format_value, parse_fixture_line
from .scenarios import (
    ExpCorrRayleigh,
    IidRice,
    InidRayleigh,
    OrderedInidRayleigh,
    ThresholdSpec,
    build_scenario,
    exp_corr_eigenvalues,
    gamma0,
    threshold_g0,
)
from .sphere_sampler import sphere_batch

EXACT_RTOL = 1e-10
GAMMA0_RTOL = 1e-14
N_SIGMA = 3.0
_NON_SCENARIO_KEYS = {"scenario", "g0", "gamma_th_db", "esn0_db", "M", "seed"}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    detail: str = ""

    def line(self):
        status = "pass" if self.passed else "fail"
        return f"{self.name},{status},{self.measured!r},{self.bound!r}"


def _check(name, deviation, bound, detail=""):
    deviation = float(deviation)
    return CheckResult(name, bool(deviation <= bound), deviation, float(bound), detail)


def scenario_from_inputs(inputs):
    params = {k: v for k, v in inputs.items() if k not in _NON_SCENARIO_KEYS}
    return build_scenario(inputs["scenario"], **params)


def _threshold(inputs):
    if "g0" in inputs:
        return float(inputs["g0"])
    return ThresholdSpec(float(inputs["gamma_th_db"]), float(inputs["esn0_db"]))


def _rel_bound(value, rtol):
    return rtol * abs(value) + 1e-300


# ---------------------------------------------------------------------------
# fixture handlers: row -> (deviation, bound)
# ---------------------------------------------------------------------------

def _bessel(row, **_):
    x = specfun.bessel_i(int(row.inputs["nu"]), row.inputs["x"])
    return abs(x - row.value), _rel_bound(row.value, EXACT_RTOL)


def _marcum(row, **_):
    i = row.inputs
    x = specfun.marcum_q(int(i["mu"]), i["a"], i["b"])
    return abs(x - row.value), _rel_bound(row.value, EXACT_RTOL)


def _hypoexp(row, **_):
    means = np.atleast_1d(row.inputs["means"])
    x = specfun.hypoexp_cdf(means, row.inputs["t"])
    return abs(x - row.value), _rel_bound(row.value, EXACT_RTOL)


def _gamma0(row, **_):
    i = row.inputs
    x = gamma0(ThresholdSpec(i["gamma_th_db"], i["esn0_db"]), int(i["n"]))
    return abs(x - row.value), _rel_bound(row.value, GAMMA0_RTOL)


def _eigenvalue(row, **_):
    i = row.inputs
    lam = np.sort(exp_corr_eigenvalues(i["sigma"], i["rho"], int(i["branches"])))[::-1]
    return abs(lam[int(i["index"])] - row.value), _rel_bound(row.value, EXACT_RTOL)


def _mrc_outage(row, **_):
    sc = scenario_from_inputs(row.inputs)
    x = sphere_probability(sc, threshold_g0(sc, _threshold(row.inputs)))
    return abs(x - row.value), _rel_bound(row.value, EXACT_RTOL) + 10.0 * row.error_bound


def _mc_standard_error(row, p):
    # a handful of MC hits understates the spread, so floor it with the
    # binomial error at the reference probability
    M = int(row.inputs["M"])
    return max(row.error_bound, math.sqrt(max(p * (1.0 - p), 0.0) / M))


def _mrc_outage_mc(row, **_):
    sc = scenario_from_inputs(row.inputs)
    p = sphere_probability(sc, threshold_g0(sc, _threshold(row.inputs)))
    return abs(p - row.value), N_SIGMA * _mc_standard_error(row, p)


def _egc_outage(row, samples, seed, **_):
    sc = scenario_from_inputs(row.inputs)
    est = estimate_sphere_is(sc, _threshold(row.inputs), samples, seed)
    ref_se = _mc_standard_error(row, row.value) if "M" in row.inputs else row.error_bound
    bound = N_SIGMA * math.hypot(est.std_err, ref_se) + _rel_bound(row.value, EXACT_RTOL)
    return abs(est.p_hat - row.value), bound


FIXTURE_HANDLERS = {
    "bessel_i": _bessel,
    "marcum_q": _marcum,
    "hypoexp_cdf": _hypoexp,
    "gamma0": _gamma0,
    "corr_eigenvalue": _eigenvalue,
    "mrc_outage": _mrc_outage,
    "mrc_outage_mc": _mrc_outage_mc,
    "egc_outage": _egc_outage,
    "egc_outage_mc": _egc_outage,
}


def _row_label(row):
    keys = ";".join(f"{k}={format_value(v)}" for k, v in row.inputs.items() if k not in ("M", "seed"))
    return f"{row.name}[{keys}]"


def check_fixture(row, samples=200_000, seed=0):
    label = _row_label(row)
    handler = FIXTURE_HANDLERS.get(row.name)
    if handler is None:
        return CheckResult(label, False, math.nan, 0.0, f"no handler for fixture {row.name!r}")
    try:
        deviation, bound = handler(row, samples=samples, seed=seed)
    except (RarefallError, ValueError, ArithmeticError) as exc:
        return CheckResult(label, False, math.nan, 0.0, f"{type(exc).__name__}: {exc}")
    return _check(label, deviation, bound)


def load_fixture_checks(path=None, samples=200_000, seed=0):
    """Parse the fixture table and run every row; malformed lines fail."""
    path = default_fixture_path() if path is None else path
    results = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                row = parse_fixture_line(line)
            except ValueError as exc:
                results.append(CheckResult(f"fixture-line-{lineno}", False, math.nan, 0.0, str(exc)))
                continue
            results.append(check_fixture(row, samples=samples, seed=seed))
    if not results:
        results.append(CheckResult("fixture-table", False, math.nan, 0.0, f"no fixtures in {path}"))
    return results


# ---------------------------------------------------------------------------
# invariant checks
# ---------------------------------------------------------------------------

SMOKE_SCENARIOS = (
    InidRayleigh((10.0,) * 4),
    ExpCorrRayleigh(math.sqrt(5.0), 0.5, 4),
    IidRice(3.0, 10.0, 4),
    OrderedInidRayleigh(tuple(10.0 ** (np.array([5, 5, 8, 8]) / 10.0)), 2),
)


def _sphere_membership(samples, seed):
    out = []
    rng = np.random.default_rng(seed)
    for sc in SMOKE_SCENARIOS:
        g0 = gamma0(ThresholdSpec(-9.0, 1.0), sc.combined_branches)
        y, ncols, _ = sphere_batch(sc, g0, samples, rng)
        sums = y[:, :ncols].sum(axis=1) if isinstance(sc, OrderedInidRayleigh) else y.sum(axis=1)
        violations = int(np.count_nonzero(sums > 1.0)) + int(np.count_nonzero(y < 0))
        out.append(_check(f"sphere-membership[{sc.name}]", violations, 0))
    return out


def _bessel_monotone():
    x = np.linspace(0.0, 700.0, 1000)
    v = np.array([specfun.log_bessel_i0(t) for t in x])
    violations = int(np.count_nonzero(np.diff(v) < 0)) + int(np.count_nonzero(v < 0))
    return _check("bessel-i0-monotone", violations, 0)


def _hypoexp_monotone():
    t = np.linspace(0.0, 40.0, 200)
    v = np.array([specfun.hypoexp_cdf([1.0, 2.0, 4.0, 4.0], s) for s in t])
    violations = int(np.count_nonzero(np.diff(v) < 0)) + int(np.count_nonzero((v < 0) | (v > 1)))
    return _check("hypoexp-cdf-monotone", violations, 0)


def _box_dominates_sphere():
    om = SMOKE_SCENARIOS[0].omegas
    violations = 0
    for g in np.linspace(0.01, 10.0, 200):
        if box_probability(om, g) < sphere_probability(SMOKE_SCENARIOS[0], g):
            violations += 1
    return _check("box-contains-sphere", violations, 0)


def _single_branch_exact():
    sc = InidRayleigh((2.0,))
    est = estimate_sphere_is(sc, 0.7, 1000, 0)
    return _check("single-branch-zero-variance", abs(est.p_hat - est.p_tilde) + est.std_err, 0.0)


def _backend_parity(seed):
    try:
        fast = _backend.load("cython")
    except ImportError:
        return CheckResult("backend-parity", True, 0.0, 0.0, "compiled backend unavailable")
    slow = _backend.load("python")
    rng = np.random.default_rng(seed)
    u = rng.dirichlet(np.ones(5), size=2000)[:, :4].copy()
    w = np.array([0.3, 0.5, 0.7, 0.9])
    dev = 0.0
    dev = max(dev, np.max(np.abs(fast.log_accept_linear(u, w) - slow.log_accept_linear(u, w))))
    dev = max(dev, np.max(np.abs(fast.log_accept_corr(u, w, 1.3) - slow.log_accept_corr(u, w, 1.3))))
    dev = max(dev, np.max(np.abs(fast.log_accept_rice(u, 2.0, 3.5) - slow.log_accept_rice(u, 2.0, 3.5))))
    return _check("backend-parity", dev, 1e-12)


def invariant_checks(samples=10_000, seed=0):
    results = [_bessel_monotone(), _hypoexp_monotone(), _box_dominates_sphere(), _single_branch_exact(),
               _backend_parity(seed)]
    results += _sphere_membership(samples, seed)
    return results


def run_validation(fixtures=None, samples=200_000, seed=0):
    """All fixture comparisons followed by the invariant checks."""
    return load_fixture_checks(fixtures, samples=samples, seed=seed) + invariant_checks(seed=seed)
