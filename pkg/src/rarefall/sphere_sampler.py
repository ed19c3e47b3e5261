"""Sampling from the fading law truncated to the sphere sum R_i^2 <= g0^2.

Every sampler works on G_i = R_i^2 / g0^2, which lives on the solid unit
simplex. Proposals are uniform on that simplex and accepted with
probability f(g0 sqrt(G)) / sup f over the simplex; the acceptance
probabilities below are those ratios written out per scenario. Each
requested sample runs its own draw-then-test loop. Loops are advanced in
lockstep across the batch so the hot part is vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import ConfigError, NumericError, RejectionCapError, TableMismatchError
from .mrc_oracle import PermutationWeightTable, ordered_permutation_table
from .scenarios import ExpCorrRayleigh, IidRice, InidRayleigh, OrderedInidRayleigh

REJECTION_CAP = 10**6
# slack for rounding when checking that an acceptance probability is <= 1
_LOG_ACCEPT_SLACK = 1e-12


@dataclass
class RejectionStats:
    proposals: int = 0
    accepted: int = 0

    @property
    def acceptance_rate(self):
        return self.accepted / self.proposals if self.proposals else float("nan")

    def __add__(self, other):
        return RejectionStats(self.proposals + other.proposals, self.accepted + other.accepted)


def sample_uniform_simplex(L: int, rng: np.random.Generator, size=None):
    """Uniform point(s) in {u >= 0, sum(u) <= 1} from L+1 unit exponentials."""
    n = 1 if size is None else size
    e = rng.standard_exponential((n, L + 1))
    u = e[:, :L] / e.sum(axis=1)[:, None]
    return u[0] if size is None else u


def _rejection_loop(size, L, rng, log_accept):
    out = np.empty((size, L))
    pending = np.arange(size)
    rejections = np.zeros(size, dtype=np.int64)
    stats = RejectionStats()
    while pending.size:
        m = pending.size
        u = sample_uniform_simplex(L, rng, m)
        u0 = rng.random(m)
        logacc = log_accept(u, pending)
        if not np.all(logacc <= _LOG_ACCEPT_SLACK):
            raise NumericError("acceptance probability outside (0, 1]; check scenario parameters")
        accept = u0 <= np.exp(logacc)
        n_acc = int(np.count_nonzero(accept))
        stats.proposals += m
        stats.accepted += n_acc
        out[pending[accept]] = u[accept]
        pending = pending[~accept]
        if pending.size:
            rejections[pending] += 1
            if rejections[pending].max() >= REJECTION_CAP:
                raise RejectionCapError(
                    f"{REJECTION_CAP} consecutive rejections for one sample "
                    f"(running acceptance rate {stats.acceptance_rate:.3g})",
                    proposals=stats.proposals,
                    accepted=stats.accepted,
                )
    return out, stats


# ---------------------------------------------------------------------------
# per-scenario acceptance probabilities
# ---------------------------------------------------------------------------

def _corr_parameters(sigma, rho, L, g0):
    g0sq = g0 * g0
    if L == 1:
        weights = np.array([g0sq / (2.0 * sigma * sigma)])
        return weights, 0.0
    d = np.full(L, 1.0 + rho * rho)
    d[0] = d[-1] = 1.0
    denom = (1.0 - rho * rho) * sigma * sigma
    weights = g0sq * d / (2.0 * denom)
    kappa = rho * g0sq / denom
    return weights, kappa


def _rice_parameters(K, omega, g0):
    g0sq = g0 * g0
    rate = (K + 1.0) * g0sq / omega
    beta = 2.0 * math.sqrt(K * (K + 1.0) * g0sq / omega)
    return rate, beta


def _ordered_coefficients(table):
    return table.g0 * table.g0 * table.cum_rates / table.alphas


def log_acceptance(scenario, g0, u, table=None, perm_idx=None):
    """Log acceptance probability of each proposal row in ``u``.

    For the ordered scenario ``perm_idx`` gives, per row, the index of the
    permutation (into ``table``) the proposal was drawn under.
    """
    u = np.ascontiguousarray(u, dtype=float)
    if isinstance(scenario, InidRayleigh):
        w = g0 * g0 / np.asarray(scenario.omegas)
        return kernels.log_accept_linear(u, w)
    if isinstance(scenario, ExpCorrRayleigh):
        weights, kappa = _corr_parameters(scenario.sigma, scenario.rho, scenario.L, g0)
        return kernels.log_accept_corr(u, weights, kappa)
    if isinstance(scenario, IidRice):
        rate, beta = _rice_parameters(scenario.K, scenario.omega, g0)
        return kernels.log_accept_rice(u, rate, beta)
    if isinstance(scenario, OrderedInidRayleigh):
        if table is None:
            table = ordered_permutation_table(scenario.omegas, scenario.N, g0)
        coef = _ordered_coefficients(table)
        return kernels.log_accept_rows(u, np.ascontiguousarray(coef[perm_idx]))
    raise ConfigError(f"unknown scenario {scenario!r}")


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def _finish(g, g0, stats, size):
    r = g0 * np.sqrt(g)
    return (r[0] if size is None else r), stats


def rejection_inid_rayleigh(omegas, g0, rng, size=None):
    """Envelopes from independent Rayleigh laws truncated to the sphere.

    Returns ``(R, stats)``; ``R`` has shape (L,) or (size, L).
    """
    scenario = InidRayleigh(tuple(omegas))
    w = g0 * g0 / np.asarray(scenario.omegas)
    g, stats = _rejection_loop(1 if size is None else size, scenario.L, rng,
                               lambda u, _: kernels.log_accept_linear(u, w))
    return _finish(g, g0, stats, size)


def rejection_corr_rayleigh(sigma, rho, L, g0, rng, size=None):
    ExpCorrRayleigh(sigma, rho, L)
    weights, kappa = _corr_parameters(sigma, rho, L, g0)
    g, stats = _rejection_loop(1 if size is None else size, L, rng,
                               lambda u, _: kernels.log_accept_corr(u, weights, kappa))
    return _finish(g, g0, stats, size)


def rejection_iid_rice(K, omega, L, g0, rng, size=None):
    IidRice(K, omega, L)
    rate, beta = _rice_parameters(K, omega, g0)
    g, stats = _rejection_loop(1 if size is None else size, L, rng,
                               lambda u, _: kernels.log_accept_rice(u, rate, beta))
    return _finish(g, g0, stats, size)


def _ordered_simplex(table: PermutationWeightTable, rng, n):
    L = len(table.omegas)
    perm_idx = rng.choice(len(table.weights), size=n, p=table.weights)
    coef = _ordered_coefficients(table)
    g, stats = _rejection_loop(n, L, rng,
                               lambda u, rows: kernels.log_accept_rows(u, np.ascontiguousarray(coef[perm_idx[rows]])))
    return kernels.ordered_gains(g, table.alphas), stats


def _check_table(table, omegas, N, g0):
    if (tuple(float(w) for w in omegas) != table.omegas or int(N) != table.N
            or not math.isclose(float(g0), table.g0, rel_tol=1e-15)):
        raise TableMismatchError(
            f"table built for omegas={table.omegas}, N={table.N}, g0={table.g0}; "
            f"called with omegas={tuple(omegas)}, N={N}, g0={g0}"
        )


def rejection_ordered(omegas, N, g0, table, rng, size=None):
    """Top-N gains h^(1) >= ... >= h^(N) with sum(h[:N]) <= g0^2.

    ``table`` must come from :func:`ordered_permutation_table` for the same
    ``(omegas, N, g0)``.
    """
    _check_table(table, omegas, N, g0)
    y, stats = _ordered_simplex(table, rng, 1 if size is None else size)
    h = (g0 * g0) * y[:, :N]
    return (h[0] if size is None else h), stats


def sphere_batch(scenario, g0, size, rng, table=None):
    """Draw ``size`` sphere-truncated samples in normalized form.

    Returns ``(y, ncols, stats)`` where the EGC event is
    ``sum(sqrt(y[:, :ncols])) <= 1``: y = R^2/g0^2 for the EGC scenarios and
    y = h^(i)/g0^2 for the ordered scenario.
    """
    if isinstance(scenario, InidRayleigh):
        w = g0 * g0 / np.asarray(scenario.omegas)
        g, stats = _rejection_loop(size, scenario.L, rng, lambda u, _: kernels.log_accept_linear(u, w))
        return g, scenario.L, stats
    if isinstance(scenario, ExpCorrRayleigh):
        weights, kappa = _corr_parameters(scenario.sigma, scenario.rho, scenario.L, g0)
        g, stats = _rejection_loop(size, scenario.L, rng, lambda u, _: kernels.log_accept_corr(u, weights, kappa))
        return g, scenario.L, stats
    if isinstance(scenario, IidRice):
        rate, beta = _rice_parameters(scenario.K, scenario.omega, g0)
        g, stats = _rejection_loop(size, scenario.L, rng, lambda u, _: kernels.log_accept_rice(u, rate, beta))
        return g, scenario.L, stats
    if isinstance(scenario, OrderedInidRayleigh):
        if table is None:
            table = ordered_permutation_table(scenario.omegas, scenario.N, g0)
        y, stats = _ordered_simplex(table, rng, size)
        return y, scenario.N, stats
    raise ConfigError(f"unknown scenario {scenario!r}")
