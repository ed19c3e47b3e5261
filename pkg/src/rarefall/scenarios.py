"""Fading scenarios, threshold conversion and untruncated envelope samplers.

All parameters are linear. dB conversion happens in :func:`db_to_linear`
and at the CLI boundary only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError, ConvergenceError

MAX_BRANCHES = 16
MAX_RHO = 0.99


def db_to_linear(x_db):
    """Power-like dB quantity to linear units."""
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def _positive(name, v):
    v = float(v)
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(f"{name} must be positive and finite, got {v!r}")
    return v


def _branches(L):
    if int(L) != L or not 1 <= L <= MAX_BRANCHES:
        raise ConfigError(f"number of branches must be an integer in [1, {MAX_BRANCHES}], got {L!r}")
    return int(L)


@dataclass(frozen=True)
class InidRayleigh:
    """Independent Rayleigh branches with E[R_i^2] = omegas[i]."""

    omegas: tuple

    def __post_init__(self):
        omegas = tuple(_positive("omega", w) for w in self.omegas)
        _branches(len(omegas))
        object.__setattr__(self, "omegas", omegas)

    @property
    def L(self):
        return len(self.omegas)

    @property
    def combined_branches(self):
        return self.L

    name = "inid-rayleigh"


@dataclass(frozen=True)
class ExpCorrRayleigh:
    """Rayleigh envelopes R_i = |X_i + jY_i| with cov(X) = sigma^2 rho^|i-j|."""

    sigma: float
    rho: float
    branches: int

    def __post_init__(self):
        object.__setattr__(self, "sigma", _positive("sigma", self.sigma))
        rho = float(self.rho)
        if not (0.0 <= rho <= MAX_RHO):
            raise ConfigError(f"rho must lie in [0, {MAX_RHO}], got {rho!r}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "branches", _branches(self.branches))

    @property
    def L(self):
        return self.branches

    @property
    def combined_branches(self):
        return self.L

    name = "corr-rayleigh"


@dataclass(frozen=True)
class IidRice:
    """i.i.d. Rice branches with Rice factor K (linear) and E[R_i^2] = omega."""

    K: float
    omega: float
    branches: int

    def __post_init__(self):
        K = float(self.K)
        if not (math.isfinite(K) and K >= 0):
            raise ConfigError(f"Rice factor K must be non-negative, got {K!r}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "omega", _positive("omega", self.omega))
        object.__setattr__(self, "branches", _branches(self.branches))

    @property
    def L(self):
        return self.branches

    @property
    def combined_branches(self):
        return self.L

    name = "iid-rice"


@dataclass(frozen=True)
class OrderedInidRayleigh:
    """Independent Rayleigh branches of which the N strongest are combined."""

    omegas: tuple
    select_n: int

    def __post_init__(self):
        omegas = tuple(_positive("omega", w) for w in self.omegas)
        L = _branches(len(omegas))
        n = self.select_n
        if int(n) != n or not 1 <= n <= L:
            raise ConfigError(f"select_n must be an integer in [1, {L}], got {n!r}")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "select_n", int(n))

    @property
    def L(self):
        return len(self.omegas)

    @property
    def N(self):
        return self.select_n

    @property
    def combined_branches(self):
        return self.select_n

    name = "ordered-rayleigh"


FadingScenario = Union[InidRayleigh, ExpCorrRayleigh, IidRice, OrderedInidRayleigh]

SCENARIO_NAMES = ("inid-rayleigh", "corr-rayleigh", "iid-rice", "ordered-rayleigh")


def build_scenario(name, *, omegas=None, sigma=None, rho=None, K=None, omega=None,
                   branches=None, select_n=None) -> FadingScenario:
    """Construct a scenario by name from linear parameters.

    Missing parameters a scenario needs raise ConfigError naming the field.
    """

    def need(field, value):
        if value is None:
            raise ConfigError(f"scenario {name!r} needs {field}")
        return value

    if name == "inid-rayleigh":
        return InidRayleigh(tuple(np.atleast_1d(need("omegas", omegas))))
    if name == "corr-rayleigh":
        return ExpCorrRayleigh(need("sigma", sigma), need("rho", rho), need("branches", branches))
    if name == "iid-rice":
        return IidRice(need("K", K), need("omega", omega), need("branches", branches))
    if name == "ordered-rayleigh":
        return OrderedInidRayleigh(tuple(np.atleast_1d(need("omegas", omegas))), need("select_n", select_n))
    raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}")


@dataclass(frozen=True)
class ThresholdSpec:
    gamma_th_db: float
    es_over_n0_db: float

    def __post_init__(self):
        for name in ("gamma_th_db", "es_over_n0_db"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")


def gamma0(spec: ThresholdSpec, combined_branches: int) -> float:
    """Envelope-sum threshold sqrt(gamma_th * n / (Es/N0)), inputs in dB."""
    if combined_branches < 1:
        raise ConfigError("combined_branches must be >= 1")
    # both dB values are power ratios, so their difference halves in amplitude
    return math.sqrt(combined_branches) * 10.0 ** ((spec.gamma_th_db - spec.es_over_n0_db) / 20.0)


def threshold_g0(scenario, threshold):
    """Accept either a linear g0 or a :class:`ThresholdSpec`."""
    if isinstance(threshold, ThresholdSpec):
        return gamma0(threshold, scenario.combined_branches)
    g0 = float(threshold)
    if not (math.isfinite(g0) and g0 > 0):
        raise ConfigError(f"threshold gamma0 must be positive, got {g0!r}")
    return g0


# ---------------------------------------------------------------------------
# Untruncated samplers
# ---------------------------------------------------------------------------

def _ar1_gaussian(sigma, rho, L, size, rng):
    """Rows of an AR(1) Gaussian vector with covariance sigma^2 rho^|i-j|."""
    z = rng.standard_normal((size, L))
    x = np.empty_like(z)
    x[:, 0] = sigma * z[:, 0]
    innov = sigma * math.sqrt(1.0 - rho * rho)
    for i in range(1, L):
        x[:, i] = rho * x[:, i - 1] + innov * z[:, i]
    return x


def sample_naive_batch(scenario: FadingScenario, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` envelope vectors drawn from the untruncated joint law.

    Returns an array of shape (size, L). For the ordered scenario each row
    is sorted in descending order.
    """
    if isinstance(scenario, (InidRayleigh, OrderedInidRayleigh)):
        omegas = np.asarray(scenario.omegas)
        r = np.sqrt(omegas * rng.standard_exponential((size, scenario.L)))
        if isinstance(scenario, OrderedInidRayleigh):
            r = -np.sort(-r, axis=1)
        return r
    if isinstance(scenario, ExpCorrRayleigh):
        x = _ar1_gaussian(scenario.sigma, scenario.rho, scenario.L, size, rng)
        y = _ar1_gaussian(scenario.sigma, scenario.rho, scenario.L, size, rng)
        return np.hypot(x, y)
    if isinstance(scenario, IidRice):
        K, omega = scenario.K, scenario.omega
        los = math.sqrt(K * omega / (K + 1.0))
        diffuse = math.sqrt(omega / (2.0 * (K + 1.0)))
        re = los + diffuse * rng.standard_normal((size, scenario.L))
        im = diffuse * rng.standard_normal((size, scenario.L))
        return np.hypot(re, im)
    raise ConfigError(f"unknown scenario {scenario!r}")


def sample_naive(scenario: FadingScenario, rng: np.random.Generator) -> np.ndarray:
    """One envelope vector (R_1, ..., R_L) from the untruncated law."""
    return sample_naive_batch(scenario, 1, rng)[0]


# ---------------------------------------------------------------------------
# Covariance eigenvalues
# ---------------------------------------------------------------------------

def exp_corr_matrix(sigma, rho, L):
    idx = np.arange(L)
    return sigma * sigma * rho ** np.abs(idx[:, None] - idx[None, :])


def jacobi_eigenvalues(a, tol=1e-13, max_sweeps=100):
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm is below ``tol`` times the
    Frobenius norm of the matrix. Returned in non-increasing order.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n)
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a[off_mask]))
        if off <= tol * scale:
            return np.sort(np.diag(a))[::-1].copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
    raise ConvergenceError(f"Jacobi eigensolver did not reach tol={tol} in {max_sweeps} sweeps")


def exp_corr_eigenvalues(sigma: float, rho: float, L: int) -> np.ndarray:
    """Eigenvalues of sigma^2 rho^|i-j| (L x L), non-increasing."""
    ExpCorrRayleigh(sigma, rho, L)  # validates
    if rho == 0.0:
        return np.full(L, float(sigma) ** 2)
    return jacobi_eigenvalues(exp_corr_matrix(float(sigma), float(rho), int(L)))
