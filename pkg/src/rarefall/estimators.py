"""Naive MC, sphere sample-rejection IS and box-truncation IS estimators.

Sample counts are split into fixed blocks of ``BLOCK_SIZE`` draws. Block
``b`` of stream ``s`` always uses the random stream derived from
``SeedSequence(seed, spawn_key=(s, b))``, and blocks only return integer
counts. The estimate is therefore identical whatever number of worker
lanes executes the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._backend import kernels
from .errors import ConfigError, UnsupportedScenarioError
from .mrc_oracle import box_probability, ordered_permutation_table, sphere_probability
from .scenarios import (
    FadingScenario,
    InidRayleigh,
    OrderedInidRayleigh,
    ThresholdSpec,
    sample_naive_batch,
    threshold_g0,
)
from .sphere_sampler import RejectionStats, sphere_batch

BLOCK_SIZE = 1 << 16
CONFIDENCE = 1.96
METHODS = ("naive", "sphere_is", "box_is")


@dataclass(frozen=True)
class EstimateResult:
    method: str
    p_hat: float
    std_err: float
    samples: int
    seed: int
    gamma0: float
    chunks: int
    p_tilde: Optional[float] = None
    rejection: Optional[RejectionStats] = None
    stream: int = 0
    confidence: float = CONFIDENCE

    @property
    def rel_err(self):
        """Relative half-width C * std_err / p_hat (inf when p_hat is 0)."""
        if self.p_hat == 0.0:
            return math.inf
        return self.confidence * self.std_err / self.p_hat

    @property
    def hits(self):
        return round(self.p_hat / self.p_tilde * self.samples) if self.p_tilde else round(self.p_hat * self.samples)


def block_sizes(M):
    n_full, rest = divmod(M, BLOCK_SIZE)
    return [BLOCK_SIZE] * n_full + ([rest] if rest else [])


def block_rng(seed, stream, block):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.PCG64(ss))


def _run_blocks(work, M, seed, stream, lanes):
    """Apply ``work(n, rng)`` to every block; results come back in block order."""
    sizes = block_sizes(M)
    jobs = [(n, block_rng(seed, stream, b)) for b, n in enumerate(sizes)]
    if lanes <= 1 or len(jobs) == 1:
        return [work(n, rng) for n, rng in jobs]
    with ThreadPoolExecutor(max_workers=lanes) as pool:
        return list(pool.map(lambda job: work(*job), jobs))


def _check_run(M, seed, lanes):
    if int(M) != M or M < 1:
        raise ConfigError(f"number of samples must be a positive integer, got {M!r}")
    if int(seed) != seed or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    if lanes < 1:
        raise ConfigError(f"lanes must be >= 1, got {lanes!r}")


def _combined(scenario):
    return scenario.N if isinstance(scenario, OrderedInidRayleigh) else scenario.L


def estimate_naive(scenario: FadingScenario, threshold, M: int, seed: int = 0, *, stream: int = 0,
                   lanes: int = 1) -> EstimateResult:
    """Fraction of untruncated draws with sum R_i <= g0 (top-N sum if ordered)."""
    _check_run(M, seed, lanes)
    g0 = threshold_g0(scenario, threshold)
    ncols = _combined(scenario)

    def work(n, rng):
        return kernels.count_sum_le(sample_naive_batch(scenario, n, rng), ncols, g0)

    hits = sum(_run_blocks(work, M, seed, stream, lanes))
    p = hits / M
    return EstimateResult(
        method="naive",
        p_hat=p,
        std_err=math.sqrt(p * (1.0 - p) / M),
        samples=M,
        seed=seed,
        gamma0=g0,
        chunks=len(block_sizes(M)),
        stream=stream,
    )


def _truncated_estimate(method, p_tilde, hits, M, seed, g0, stream, stats):
    q = hits / M
    return EstimateResult(
        method=method,
        p_hat=p_tilde * q,
        std_err=p_tilde * math.sqrt(q * (1.0 - q) / M),
        samples=M,
        seed=seed,
        gamma0=g0,
        chunks=len(block_sizes(M)),
        p_tilde=p_tilde,
        rejection=stats,
        stream=stream,
    )


def estimate_sphere_is(scenario: FadingScenario, threshold, M: int, seed: int = 0, *, stream: int = 0,
                       lanes: int = 1) -> EstimateResult:
    """Sample-rejection IS: P(sphere) times the event fraction under the truncated law."""
    _check_run(M, seed, lanes)
    g0 = threshold_g0(scenario, threshold)
    p_tilde = sphere_probability(scenario, g0)
    table = None
    if isinstance(scenario, OrderedInidRayleigh):
        table = ordered_permutation_table(scenario.omegas, scenario.N, g0)

    def work(n, rng):
        y, ncols, stats = sphere_batch(scenario, g0, n, rng, table=table)
        return kernels.count_sqrt_sum_le(y, ncols, 1.0), stats

    parts = _run_blocks(work, M, seed, stream, lanes)
    hits = sum(h for h, _ in parts)
    stats = sum((s for _, s in parts), RejectionStats())
    return _truncated_estimate("sphere_is", p_tilde, hits, M, seed, g0, stream, stats)


def estimate_box_is(scenario: FadingScenario, threshold, M: int, seed: int = 0, *, stream: int = 0,
                    lanes: int = 1) -> EstimateResult:
    """IS with every envelope truncated to [0, g0] (independent Rayleigh only)."""
    if not isinstance(scenario, (InidRayleigh, OrderedInidRayleigh)):
        raise UnsupportedScenarioError(
            f"box-truncation IS needs independent Rayleigh branches, not {scenario.name}"
        )
    _check_run(M, seed, lanes)
    g0 = threshold_g0(scenario, threshold)
    omegas = np.asarray(scenario.omegas)
    mass = -np.expm1(-(g0 * g0) / omegas)
    p_box = float(np.prod(mass))
    ncols = _combined(scenario)
    ordered = isinstance(scenario, OrderedInidRayleigh)

    def work(n, rng):
        u = rng.random((n, scenario.L))
        r = np.sqrt(-omegas * np.log1p(-u * mass))
        if ordered:
            r = -np.sort(-r, axis=1)
        return kernels.count_sum_le(r, ncols, g0)

    hits = sum(_run_blocks(work, M, seed, stream, lanes))
    return _truncated_estimate("box_is", p_box, hits, M, seed, g0, stream, None)


ESTIMATORS = {
    "naive": estimate_naive,
    "sphere_is": estimate_sphere_is,
    "box_is": estimate_box_is,
}


def estimate(method, scenario, threshold, M, seed=0, **kw):
    try:
        fn = ESTIMATORS[method]
    except KeyError:
        raise ConfigError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    return fn(scenario, threshold, M, seed, **kw)


# ---------------------------------------------------------------------------
# efficiency metrics
# ---------------------------------------------------------------------------

def cv_squared(p_tilde: float, p: float) -> float:
    """Squared coefficient of variation of the truncation estimator, p_tilde/p - 1."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p!r}")
    if p_tilde > 1.0:
        raise ValueError(f"p_tilde must lie in [p, 1], got {p_tilde!r}")
    return max(0.0, p_tilde / p - 1.0)


def rel_err_naive(p, M, C=CONFIDENCE):
    return C * math.sqrt(p * (1.0 - p)) / (p * math.sqrt(M))


def rel_err_is(p, p_tilde, M, C=CONFIDENCE):
    return C * math.sqrt(cv_squared(p_tilde, p)) / math.sqrt(M)


def required_runs_naive(p: float, target_eps: float = 0.05, C: float = CONFIDENCE) -> int:
    """Smallest M with C sqrt(p(1-p)) / (p sqrt(M)) <= target_eps."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    if target_eps <= 0:
        raise ValueError("target_eps must be positive")
    return max(1, math.ceil(C * C * (1.0 - p) / (target_eps * target_eps * p)))


def required_runs_is(p: float, p_tilde: float, target_eps: float = 0.05, C: float = CONFIDENCE) -> int:
    """Smallest M with C sqrt(p_tilde/p - 1) / sqrt(M) <= target_eps."""
    if target_eps <= 0:
        raise ValueError("target_eps must be positive")
    return max(1, math.ceil(C * C * cv_squared(p_tilde, p) / (target_eps * target_eps)))


@dataclass(frozen=True)
class EfficiencyRow:
    gamma_th_db: float
    gamma0: float
    p_estimate: float
    std_err: float
    p_tilde: float
    cv_squared: Optional[float]
    runs_naive: Optional[int]
    runs_sphere_is: Optional[int]
    runs_box_is: Optional[int] = None
    p_tilde_box: Optional[float] = None
    accept_rate: Optional[float] = None
    samples: int = 0
    chunks: int = 0


@dataclass
class EfficiencyReport:
    rows: list = field(default_factory=list)
    target_rel_err: float = 0.05
    confidence: float = CONFIDENCE


def efficiency_row(scenario, spec: ThresholdSpec, M=10**6, seed=0, *, target_rel_err=0.05,
                   C=CONFIDENCE, stream=0, lanes=1) -> EfficiencyRow:
    """Required runs per method at one threshold.

    p comes from a sphere-IS run with ``M`` samples; the truncation
    probabilities are exact.
    """
    est = estimate_sphere_is(scenario, spec, M, seed, stream=stream, lanes=lanes)
    p, p_tilde = est.p_hat, est.p_tilde
    box = isinstance(scenario, (InidRayleigh, OrderedInidRayleigh))
    p_box = box_probability(scenario.omegas, est.gamma0) if box else None
    if p > 0.0:
        cv2 = cv_squared(p_tilde, p)
        runs_naive = required_runs_naive(p, target_eps=target_rel_err, C=C) if p < 1.0 else 1
        runs_sphere = required_runs_is(p, p_tilde, target_eps=target_rel_err, C=C)
        runs_box = required_runs_is(p, p_box, target_eps=target_rel_err, C=C) if box else None
    else:
        cv2 = runs_naive = runs_sphere = runs_box = None
    return EfficiencyRow(
        gamma_th_db=spec.gamma_th_db,
        gamma0=est.gamma0,
        p_estimate=p,
        std_err=est.std_err,
        p_tilde=p_tilde,
        cv_squared=cv2,
        runs_naive=runs_naive,
        runs_sphere_is=runs_sphere,
        runs_box_is=runs_box,
        p_tilde_box=p_box,
        accept_rate=est.rejection.acceptance_rate,
        samples=M,
        chunks=est.chunks,
    )


def efficiency_report(scenario, gamma_th_db_grid, es_over_n0_db=1.0, M=10**6, seed=0, *,
                      target_rel_err=0.05, C=CONFIDENCE, lanes=1) -> EfficiencyReport:
    rows = [
        efficiency_row(scenario, ThresholdSpec(float(g), es_over_n0_db), M, seed,
                       target_rel_err=target_rel_err, C=C, stream=i, lanes=lanes)
        for i, g in enumerate(gamma_th_db_grid)
    ]
    return EfficiencyReport(rows=rows, target_rel_err=target_rel_err, confidence=C)
