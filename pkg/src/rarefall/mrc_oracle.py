"""Closed-form probability of the truncation sphere (the MRC outage).

For each scenario these give P(sum R_i^2 <= g0^2), or for the ordered
scenario P(sum of the N largest gains <= g0^2). The sphere-IS estimator
multiplies its empirical event fraction by this value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError
from .scenarios import (
    ExpCorrRayleigh,
    IidRice,
    InidRayleigh,
    OrderedInidRayleigh,
    exp_corr_eigenvalues,
)
from .specfun import hypoexp_cdf, marcum_p

MAX_ORDERED_BRANCHES = 8


def mrc_outage_inid_rayleigh(omegas, g0: float) -> float:
    return hypoexp_cdf(omegas, g0 * g0)


def mrc_outage_corr_rayleigh(sigma: float, rho: float, L: int, g0: float) -> float:
    # sum R_i^2 is a sum of independent exponentials with means 2*lambda_i
    lam = exp_corr_eigenvalues(sigma, rho, L)
    return hypoexp_cdf(2.0 * lam, g0 * g0)


def mrc_outage_iid_rice(K: float, omega: float, L: int, g0: float) -> float:
    omega_sum = L * omega
    a = math.sqrt(2.0 * K * L)
    b = math.sqrt(2.0 * (K + 1.0) * L / omega_sum) * g0
    return marcum_p(L, a, b)


def alpha_weights(L: int, N: int) -> np.ndarray:
    """Coefficients turning gain spacings into the top-N partial sum."""
    return np.minimum(np.arange(1, L + 1), N).astype(float)


@dataclass(frozen=True)
class PermutationWeightTable:
    """Mixture over branch orderings used by the ordered sampler.

    ``cum_rates[k, l]`` is sum_{j<=l} 1/omega[perm[k, j]], the rate of the
    l-th spacing under permutation k.
    """

    omegas: tuple
    N: int
    g0: float
    permutations: np.ndarray
    weights: np.ndarray
    per_permutation_ptilde: np.ndarray
    cum_rates: np.ndarray
    p_tilde: float

    @property
    def alphas(self):
        return alpha_weights(len(self.omegas), self.N)


@lru_cache(maxsize=64)
def _ordered_table(omegas, N, g0):
    L = len(omegas)
    alphas = alpha_weights(L, N)
    inv = 1.0 / np.asarray(omegas)
    perms = np.array(list(itertools.permutations(range(L))), dtype=np.intp)
    cum = np.cumsum(inv[perms], axis=1)
    # prior probability of each ordering: prod_l 1/(omega_{i_l} * c_l)
    prior = np.prod(inv[perms] / cum, axis=1)
    ptilde = np.array([hypoexp_cdf(alphas / c, g0 * g0) for c in cum])
    mass = prior * ptilde
    total = float(mass.sum())
    if total > 0:
        weights = mass / total
    else:
        weights = prior / prior.sum()
    for arr in (perms, cum, weights, ptilde):
        arr.setflags(write=False)
    return PermutationWeightTable(
        omegas=omegas,
        N=N,
        g0=g0,
        permutations=perms,
        weights=weights,
        per_permutation_ptilde=ptilde,
        cum_rates=cum,
        p_tilde=total,
    )


def ordered_permutation_table(omegas, N: int, g0: float) -> PermutationWeightTable:
    """Enumerate all L! orderings with their mixture weights (L <= 8)."""
    omegas = tuple(float(w) for w in omegas)
    if len(omegas) > MAX_ORDERED_BRANCHES:
        raise ConfigError(
            f"ordered scenario enumerates L! permutations; L must be <= {MAX_ORDERED_BRANCHES}, got {len(omegas)}"
        )
    OrderedInidRayleigh(omegas, N)  # validates
    return _ordered_table(omegas, int(N), float(g0))


def mrc_outage_ordered(omegas, N: int, g0: float) -> float:
    return ordered_permutation_table(omegas, N, g0).p_tilde


def box_probability(omegas, g0: float) -> float:
    """P(max R_i <= g0) for independent Rayleigh branches."""
    x = (g0 * g0) / np.asarray(omegas, dtype=float)
    return float(np.prod(-np.expm1(-x)))


def sphere_probability(scenario, g0: float) -> float:
    """Dispatch to the closed form matching ``scenario``."""
    if isinstance(scenario, InidRayleigh):
        return mrc_outage_inid_rayleigh(scenario.omegas, g0)
    if isinstance(scenario, ExpCorrRayleigh):
        return mrc_outage_corr_rayleigh(scenario.sigma, scenario.rho, scenario.L, g0)
    if isinstance(scenario, IidRice):
        return mrc_outage_iid_rice(scenario.K, scenario.omega, scenario.L, g0)
    if isinstance(scenario, OrderedInidRayleigh):
        return mrc_outage_ordered(scenario.omegas, scenario.N, g0)
    raise ConfigError(f"unknown scenario {scenario!r}")
