"""Independent reference computations for tests and ``rarefall validate``.

Nothing here calls into :mod:`rarefall.specfun`. Special functions come
from mpmath (extended precision) or scipy.special, integrals from
scipy.integrate, and MC references from plain untruncated sampling.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from importlib import resources

import mpmath as mp
import numpy as np
from scipy import integrate, special

from .errors import ConfigError, NumericError
from .scenarios import (
    ExpCorrRayleigh,
    IidRice,
    InidRayleigh,
    OrderedInidRayleigh,
    exp_corr_matrix,
    sample_naive_batch,
)

_DPS = 60


# ---------------------------------------------------------------------------
# extended-precision series
# ---------------------------------------------------------------------------

def series_bessel_i(nu, x, dps=_DPS):
    """sum_k (x/2)^(2k+nu) / (k! (k+nu)!) accumulated in mpmath."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        half = x / 2
        total = mp.mpf(0)
        k = 0
        while True:
            term = half ** (2 * k + nu) / (mp.factorial(k) * mp.factorial(k + nu))
            total += term
            if k > half and term < total * mp.mpf(10) ** (-dps + 5):
                return float(total)
            if term == 0 and k > 0:
                return float(total)
            k += 1


def series_marcum_q(mu, a, b, dps=_DPS):
    """Poisson mixture sum_k Pois(k; a^2/2) Q(mu + k, b^2/2)."""
    with mp.workdps(dps):
        lam = mp.mpf(a) ** 2 / 2
        x = mp.mpf(b) ** 2 / 2
        total = mp.mpf(0)
        mass = mp.mpf(0)
        k = 0
        while True:
            w = mp.exp(-lam) * lam**k / mp.factorial(k) if lam > 0 else mp.mpf(1 if k == 0 else 0)
            total += w * mp.gammainc(mu + k, x, mp.inf, regularized=True)
            mass += w
            # remaining terms are bounded by the remaining Poisson mass
            if 1 - mass < mp.mpf("1e-16") * 1e-4 and k > lam:
                return float(total)
            k += 1


def partial_fraction_hypoexp_cdf(means, t, dps=_DPS):
    """1 - sum_i exp(-l_i t) prod_{j != i} l_j / (l_j - l_i), distinct rates only."""
    with mp.workdps(dps):
        lam = [1 / mp.mpf(m) for m in means]
        for i in range(len(lam)):
            for j in range(i):
                if abs(lam[i] - lam[j]) < mp.mpf("1e-6") * max(lam[i], lam[j]):
                    raise ValueError("partial-fraction oracle needs pairwise distinct means")
        t = mp.mpf(t)
        s = mp.mpf(0)
        for i, li in enumerate(lam):
            prod = mp.mpf(1)
            for j, lj in enumerate(lam):
                if j != i:
                    prod *= lj / (lj - li)
            s += mp.exp(-li * t) * prod
        return float(1 - s)


def erlang_cdf_series(k, mean, t, dps=_DPS):
    """P(k, t/mean) by the series e^-x sum_{n >= k} x^n / n!."""
    with mp.workdps(dps):
        x = mp.mpf(t) / mean
        total = mp.mpf(0)
        n = k
        while True:
            term = x**n / mp.factorial(n)
            total += term
            if n > x and term < total * mp.mpf(10) ** (-dps + 5):
                return float(mp.exp(-x) * total)
            n += 1


def bisection_eigenvalues(sigma, rho, L, dps=40):
    """Eigenvalues of sigma^2 rho^|i-j| by bisection on the inertia of S - lam I.

    The count of negative pivots in an LDL^T factorization of S - lam I
    equals the number of eigenvalues below lam (Sylvester).
    """
    with mp.workdps(dps):
        s = mp.matrix([[mp.mpf(x) for x in row] for row in exp_corr_matrix(sigma, rho, L)])

        def count_below(lam):
            a = s - lam * mp.eye(L)
            neg = 0
            for k in range(L):
                piv = a[k, k]
                if piv == 0:
                    piv = mp.mpf(10) ** (-dps)
                if piv < 0:
                    neg += 1
                for i in range(k + 1, L):
                    f = a[i, k] / piv
                    for j in range(k + 1, L):
                        a[i, j] -= f * a[k, j]
            return neg

        hi = mp.mpf(sigma) ** 2 * L + 1
        out = []
        for idx in range(L):
            lo_b, hi_b = mp.mpf(0), hi
            # idx-th smallest eigenvalue: smallest lam with count_below(lam) > idx
            for _ in range(160):
                mid = (lo_b + hi_b) / 2
                if count_below(mid) > idx:
                    hi_b = mid
                else:
                    lo_b = mid
            out.append(float((lo_b + hi_b) / 2))
        return sorted(out, reverse=True)


# ---------------------------------------------------------------------------
# joint densities (scipy.special Bessel functions)
# ---------------------------------------------------------------------------

def joint_pdf(scenario):
    """Joint envelope density of an (unordered) scenario as f(r_1, ..., r_L)."""
    if isinstance(scenario, (InidRayleigh, OrderedInidRayleigh)):
        om = scenario.omegas

        def f(*r):
            out = 1.0
            for ri, w in zip(r, om):
                out *= 2.0 * ri / w * math.exp(-ri * ri / w)
            return out

        return f
    if isinstance(scenario, ExpCorrRayleigh):
        s2, rho, L = scenario.sigma**2, scenario.rho, scenario.L
        if L == 1:
            return lambda r: r / s2 * math.exp(-r * r / (2 * s2))
        den = (1 - rho * rho) * s2

        def f(*r):
            quad = r[0] ** 2 + r[-1] ** 2 + (1 + rho * rho) * sum(x * x for x in r[1:-1])
            expo = -quad / (2 * den)
            bessel = 1.0
            for i in range(L - 1):
                z = rho * r[i] * r[i + 1] / den
                bessel *= special.i0e(z)
                expo += z
            return math.prod(r) / (s2**L * (1 - rho * rho) ** (L - 1)) * math.exp(expo) * bessel

        return f
    if isinstance(scenario, IidRice):
        K, om = scenario.K, scenario.omega
        c = 2.0 * math.sqrt(K * (K + 1) / om)

        def f(*r):
            out = 1.0
            for ri in r:
                z = c * ri
                out *= 2 * ri * (K + 1) / om * math.exp(-K - (K + 1) * ri * ri / om + z) * special.i0e(z)
            return out

        return f
    raise ConfigError(f"unknown scenario {scenario!r}")


def rice_sum_squares_pdf(K, omega, L, y):
    """Density of the sum of L i.i.d. squared Rice envelopes (K > 0)."""
    om = L * omega
    if y <= 0:
        return 0.0
    z = 2 * L * math.sqrt(K * (K + 1) * y / om)
    log_front = (math.log(L) + (L + 1) / 2 * math.log(1 + K) + (L - 1) / 2 * math.log(y)
                 - (L + 1) / 2 * math.log(om) - (L - 1) / 2 * math.log(K) - L * K)
    return math.exp(log_front - (1 + K) * L * y / om + z) * special.ive(L - 1, z)


def kappa_mu_sum_cdf_quad(K, omega, L, g0, tol=1e-13):
    val, err = integrate.quad(lambda y: rice_sum_squares_pdf(K, omega, L, y), 0.0, g0 * g0,
                              epsabs=tol, epsrel=1e-12, limit=200)
    return val, err


# ---------------------------------------------------------------------------
# nested quadrature of event probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    dimension: int
    region: str  # "simplex" (envelope sum) or "sphere" (gain sum)
    abs_tol: float = None

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ConfigError("quadrature oracle supports 2 or 3 branches")
        if self.region not in ("simplex", "sphere"):
            raise ConfigError(f"unknown region {self.region!r}")
        if self.abs_tol is None:
            object.__setattr__(self, "abs_tol", 1e-10 if self.dimension == 2 else 1e-8)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_bound: float
    converged: bool


class QuadratureToleranceError(NumericError):
    def __init__(self, result):
        super().__init__(f"quadrature reached only {result.error_bound:.3g}")
        self.result = result


def quad_event_probability(scenario, region, g0, abs_tol=None, strict=False):
    """P(event) by nested adaptive quadrature of the joint envelope density.

    ``region='simplex'`` integrates over {sum of the n largest r_i <= g0},
    ``region='sphere'`` over {sum of the n largest r_i^2 <= g0^2}, where n
    is N for the ordered scenario and L otherwise.
    """
    L = scenario.L
    spec = QuadratureSpec(L, region, abs_tol)
    n = scenario.N if isinstance(scenario, OrderedInidRayleigh) else L
    f = joint_pdf(scenario)
    if region == "simplex":
        phi, phi_inv = (lambda r: r), (lambda v: v)
    else:
        phi, phi_inv = (lambda r: r * r), (lambda v: math.sqrt(v))
    cap = phi(g0)

    def upper(prefix):
        # largest r_i keeping the n-largest sum feasible given the earlier r's
        vals = sorted((phi(p) for p in prefix), reverse=True)
        return phi_inv(max(0.0, cap - sum(vals[: n - 1])))

    # nquad passes (x0, x1, ...) with x0 innermost; x0 = r_L, x_{L-1} = r_1
    def integrand(*xs):
        return f(*xs[::-1])

    ranges = []
    for k in range(L):
        # range for x_k = r_{L-k}; depends on r_1 .. r_{L-k-1} = x_{k+1} ..
        ranges.append(lambda *outer: (0.0, upper(outer)))
    opts = {"epsabs": spec.abs_tol / 10, "epsrel": 1e-12, "limit": 200}
    value, err = integrate.nquad(integrand, ranges, opts=opts)
    res = QuadratureResult(float(value), float(err), bool(err <= spec.abs_tol))
    if strict and not res.converged:
        raise QuadratureToleranceError(res)
    return res


# ---------------------------------------------------------------------------
# brute-force Monte Carlo
# ---------------------------------------------------------------------------

MC_EVENTS = ("egc-sum", "mrc-sum", "ordered-partial-sum")


def mc_high_effort(scenario, event, g0, M=10**8, seed=0, stream=0, lanes=1):
    """Naive estimate of an event probability with its standard error.

    Events: ``egc-sum`` (sum of the combined envelopes <= g0), ``mrc-sum``
    (sum of all gains <= g0^2) and ``ordered-partial-sum`` (sum of the N
    largest gains <= g0^2).
    """
    from .estimators import _run_blocks

    if event not in MC_EVENTS:
        raise ConfigError(f"unknown event {event!r}")
    ordered = isinstance(scenario, OrderedInidRayleigh)
    if event == "ordered-partial-sum" and not ordered:
        raise ConfigError("ordered-partial-sum needs the ordered scenario")
    n = scenario.N if ordered else scenario.L

    def work(size, rng):
        if isinstance(scenario, (InidRayleigh, OrderedInidRayleigh)) and event != "egc-sum":
            h = np.asarray(scenario.omegas) * rng.standard_exponential((size, scenario.L))
        else:
            r = sample_naive_batch(scenario, size, rng)
            if event == "egc-sum":
                if ordered:
                    r = -np.sort(-r, axis=1)
                return int(np.count_nonzero(r[:, :n].sum(axis=1) <= g0))
            h = r * r
        if event == "ordered-partial-sum":
            h = -np.sort(-h, axis=1)[:, :n]
        return int(np.count_nonzero(h.sum(axis=1) <= g0 * g0))

    hits = sum(_run_blocks(work, M, seed, stream, lanes))
    p = hits / M
    return p, math.sqrt(p * (1 - p) / M)


# ---------------------------------------------------------------------------
# fixture table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixtureRow:
    name: str
    inputs: dict
    value: float
    error_bound: float
    oracle_kind: str

    def format(self):
        inputs = ";".join(f"{k}={format_value(v)}" for k, v in self.inputs.items())
        return f"{self.name}, {inputs}, {self.value!r}, {self.error_bound!r}, {self.oracle_kind}"


def format_value(v):
    if isinstance(v, (tuple, list)):
        return "|".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_value(text):
    text = text.strip()
    if "|" in text:
        return tuple(float(x) for x in text.split("|"))
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def parse_fixture_line(line):
    parts = [p.strip() for p in line.split(",")]
    if len(parts) != 5:
        raise ValueError(f"fixture line needs 5 comma-separated fields: {line!r}")
    name, inputs, value, bound, kind = parts
    kv = {}
    if inputs:
        for item in inputs.split(";"):
            k, v = item.split("=", 1)
            kv[k.strip()] = _parse_value(v)
    return FixtureRow(name, kv, float(value), float(bound), kind)


def default_fixture_path():
    return resources.files("rarefall") / "data" / "oracle_fixtures.txt"


def read_fixtures(path=None):
    path = default_fixture_path() if path is None else path
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                rows.append(parse_fixture_line(line))
    return rows


def write_fixtures(rows, path):
    header = [
        "# Oracle fixture values, regenerate with scripts/build_fixtures.py.",
        "# name, inputs (k=v;...; lists joined by |), value, error_bound, oracle_kind",
        "# error_bound: oracle uncertainty (mc = one standard error, quadrature = reported bound).",
    ]
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(header + [r.format() for r in rows]) + "\n")
    os.replace(tmp, path)
