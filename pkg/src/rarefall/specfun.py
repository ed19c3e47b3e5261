"""Special functions used by the closed-form truncation probabilities.

Everything here is plain float arithmetic with no SciPy dependency:

* modified Bessel functions of the first kind, integer order,
* the generalized Marcum Q function of integer order (and its complement),
* the CDF of a sum of independent exponentials (hypoexponential law),
  evaluated through the matrix exponential of a bidiagonal generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "BidiagonalGenerator",
    "bessel_i0",
    "bessel_i",
    "log_bessel_i",
    "log_bessel_i0",
    "marcum_q",
    "marcum_p",
    "gamma_p",
    "gamma_q",
    "hypoexp_cdf",
    "expm_stochastic",
]

SERIES_RTOL = 1e-16
MAX_TERMS = 10_000
# Above this argument the Bessel series is summed in the log domain.
_LOG_SWITCH = 50.0
# Above this argument log I0 uses the large-argument expansion.
_ASYMPTOTIC_SWITCH = 30.0
MAX_HYPOEXP_DIM = 16


def _check_nonneg(name, x):
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"{name} must be finite and non-negative, got {x!r}")


# ---------------------------------------------------------------------------
# Modified Bessel functions of the first kind
# ---------------------------------------------------------------------------

def _bessel_series_direct(nu, x):
    """Power series sum_k (x/2)^(2k+nu) / (k! (k+nu)!) for moderate x."""
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    half = 0.5 * x
    q = half * half
    term = math.exp(nu * math.log(half) - math.lgamma(nu + 1))
    total = term
    k = 0
    while True:
        k += 1
        if k > MAX_TERMS:
            raise ConvergenceError(f"Bessel series for nu={nu}, x={x} did not converge")
        term *= q / (k * (k + nu))
        total += term
        if term < SERIES_RTOL * total and k * (k + nu) > q:
            return total


def _log_bessel_series_peak(nu, x):
    """log I_nu(x) by summing the series outward from its largest term.

    All terms are scaled by the peak term so nothing overflows, which keeps
    the result accurate far beyond the float range of I_nu itself.
    """
    half = 0.5 * x
    q = half * half
    # term ratio t_{k+1}/t_k = q / ((k+1)(k+1+nu)) crosses 1 near the peak
    k_peak = max(0, int(math.floor((-nu + math.sqrt(nu * nu + 4.0 * q)) / 2.0)))
    log_peak = (2 * k_peak + nu) * math.log(half) - math.lgamma(k_peak + 1) - math.lgamma(k_peak + nu + 1)

    total = 1.0
    n_terms = 1
    term = 1.0
    k = k_peak
    while True:
        k += 1
        n_terms += 1
        term *= q / (k * (k + nu))
        total += term
        if term < SERIES_RTOL * total:
            break
        if n_terms > MAX_TERMS:
            raise ConvergenceError(f"Bessel series for nu={nu}, x={x} did not converge")
    term = 1.0
    k = k_peak
    while k > 0:
        term *= k * (k + nu) / q
        total += term
        k -= 1
        n_terms += 1
        if term < SERIES_RTOL * total:
            break
        if n_terms > MAX_TERMS:
            raise ConvergenceError(f"Bessel series for nu={nu}, x={x} did not converge")
    return log_peak + math.log(total)


def log_bessel_i(nu: int, x: float) -> float:
    """Natural log of I_nu(x); ``-inf`` when the value is exactly zero."""
    if nu < 0 or int(nu) != nu:
        raise DomainError(f"order must be a non-negative integer, got {nu!r}")
    _check_nonneg("x", x)
    nu = int(nu)
    if x == 0.0:
        return 0.0 if nu == 0 else -math.inf
    if x <= _LOG_SWITCH:
        return math.log(_bessel_series_direct(nu, x))
    return _log_bessel_series_peak(nu, x)


def bessel_i(nu: int, x: float) -> float:
    """Modified Bessel function of the first kind I_nu(x), integer nu >= 0."""
    if nu < 0 or int(nu) != nu:
        raise DomainError(f"order must be a non-negative integer, got {nu!r}")
    _check_nonneg("x", x)
    if x <= _LOG_SWITCH:
        return _bessel_series_direct(int(nu), x)
    return math.exp(_log_bessel_series_peak(int(nu), x))


def bessel_i0(x: float) -> float:
    """I_0(x) for finite x >= 0, relative error below 1e-12 up to x = 700."""
    return bessel_i(0, x)


def _log_i0_asymptotic(x):
    # I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    total = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= (2 * k - 1) ** 2 / (8.0 * k * x)
        total += term
        if term < SERIES_RTOL * total:
            break
    return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(total)


def log_bessel_i0(x: float) -> float:
    """log I_0(x); this is the scalar reference for the sampler kernels."""
    _check_nonneg("x", x)
    if x <= _ASYMPTOTIC_SWITCH:
        return math.log(_bessel_series_direct(0, x))
    return _log_i0_asymptotic(x)


# ---------------------------------------------------------------------------
# Regularized incomplete gamma (integer shape) and Marcum Q
# ---------------------------------------------------------------------------

def _gamma_p_series(s, x):
    # P(s, x) = x^s e^-x / s! * sum_n x^n / ((s+1)...(s+n))
    log_front = s * math.log(x) - x - math.lgamma(s + 1)
    term = 1.0
    total = 1.0
    n = 0
    while True:
        n += 1
        if n > MAX_TERMS:
            raise ConvergenceError(f"incomplete gamma series for s={s}, x={x} did not converge")
        term *= x / (s + n)
        total += term
        if term < SERIES_RTOL * total:
            break
    return math.exp(log_front + math.log(total))


def _gamma_q_finite(s, x):
    # Q(s, x) = e^-x sum_{n<s} x^n / n!, summed from the largest term down
    log_x = math.log(x)
    log_top = (s - 1) * log_x - x - math.lgamma(s)
    term = 1.0
    total = 1.0
    n = s - 1
    while n > 0:
        term *= n / x
        total += term
        n -= 1
        if term < SERIES_RTOL * total:
            break
    return math.exp(log_top + math.log(total))


def gamma_p(s: int, x: float) -> float:
    """Lower regularized incomplete gamma P(s, x) for integer s >= 1."""
    if x <= 0.0:
        return 0.0
    if x < s + 1:
        return _gamma_p_series(s, x)
    return 1.0 - _gamma_q_finite(s, x)


def gamma_q(s: int, x: float) -> float:
    """Upper regularized incomplete gamma Q(s, x) for integer s >= 1."""
    if x <= 0.0:
        return 1.0
    if x < s + 1:
        return 1.0 - _gamma_p_series(s, x)
    return _gamma_q_finite(s, x)


def _poisson_mixture(mu, lam, x, upper):
    """sum_k Pois(k; lam) * {Q or P}(mu + k, x)."""
    f = gamma_q if upper else gamma_p
    if lam == 0.0:
        return f(mu, x)
    k0 = int(lam)
    w0 = math.exp(k0 * math.log(lam) - lam - math.lgamma(k0 + 1))

    total = 0.0
    n_terms = 0
    # downward from the Poisson mode; the P-side terms can grow as k falls,
    # so that side always runs to k = 0
    w = w0
    k = k0
    while k >= 0 and w > 0.0:
        term = w * f(mu + k, x)
        total += term
        n_terms += 1
        if upper and term < SERIES_RTOL * total:
            break
        w *= k / lam
        k -= 1
    w = w0
    k = k0
    while True:
        k += 1
        n_terms += 1
        if n_terms > MAX_TERMS:
            raise ConvergenceError(f"Marcum series for mu={mu}, lam={lam}, x={x} did not converge")
        w *= lam / k
        term = w * f(mu + k, x)
        total += term
        bound = w if upper else term
        if k > lam and bound <= SERIES_RTOL * total:
            break
    return total


def _marcum_args(mu, a, b):
    if mu < 1 or int(mu) != mu:
        raise DomainError(f"Marcum order must be a positive integer, got {mu!r}")
    for name, v in (("a", a), ("b", b)):
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")
        if v < 0:
            raise DomainError(f"{name} must be non-negative, got {v!r}")
    return int(mu), 0.5 * a * a, 0.5 * b * b


def _marcum_pair(mu, a, b):
    mu, lam, x = _marcum_args(mu, a, b)
    if x == 0.0:
        return 0.0, 1.0
    # compute the smaller tail directly, the other by complement
    if x < mu + lam:
        p = min(1.0, _poisson_mixture(mu, lam, x, upper=False))
        return p, 1.0 - p
    q = min(1.0, _poisson_mixture(mu, lam, x, upper=True))
    return 1.0 - q, q


def marcum_q(mu: int, a: float, b: float) -> float:
    """Generalized Marcum Q function Q_mu(a, b) for integer order mu >= 1.

    Q_mu(a, b) is the survival function at b^2 of a noncentral chi-square
    variable with 2*mu degrees of freedom and noncentrality a^2.
    """
    return _marcum_pair(mu, a, b)[1]


def marcum_p(mu: int, a: float, b: float) -> float:
    """1 - Q_mu(a, b), accurate in relative terms when it is tiny."""
    return _marcum_pair(mu, a, b)[0]


# ---------------------------------------------------------------------------
# Hypoexponential CDF
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BidiagonalGenerator:
    """L x L matrix with -rates on the diagonal and +rates above it."""

    rates: tuple

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        if not rates:
            raise DomainError("generator needs at least one rate")
        for r in rates:
            if not (math.isfinite(r) and r > 0):
                raise DomainError(f"rates must be positive and finite, got {r!r}")
        object.__setattr__(self, "rates", rates)

    @classmethod
    def from_means(cls, means):
        means = [float(m) for m in means]
        if any(not m > 0 for m in means):
            raise DomainError(f"means must be positive, got {means!r}")
        return cls(tuple(1.0 / m for m in means))

    @property
    def dimension(self):
        return len(self.rates)

    def matrix(self):
        n = self.dimension
        a = np.zeros((n, n))
        for i, r in enumerate(self.rates):
            a[i, i] = -r
            if i + 1 < n:
                a[i, i + 1] = r
        return a

    def absorbing_generator(self):
        """The (L+1) x (L+1) CTMC generator with an absorbing last state."""
        n = self.dimension
        q = np.zeros((n + 1, n + 1))
        for i, r in enumerate(self.rates):
            q[i, i] = -r
            q[i, i + 1] = r
        return q


def expm_stochastic(q, t):
    """exp(t * q) for a CTMC generator q by uniformized scaling and squaring.

    Shifting by c*I with c = max exit rate makes every Taylor term
    non-negative, and after rescaling by exp(-c*tau) each squaring step
    multiplies two stochastic matrices. Entries therefore keep full
    relative accuracy even when they are tiny.
    """
    n = q.shape[0]
    c = float(-np.min(np.diag(q)))
    b = t * (q + c * np.eye(n))
    norm = float(np.max(b.sum(axis=1)))
    squarings = 0
    if norm > 0.5:
        squarings = int(math.ceil(math.log2(norm / 0.5)))
    tau = t / 2.0**squarings
    b /= 2.0**squarings
    # Horner form of the truncated Taylor series; with norm(b) <= 0.5 the
    # remaining tail is below 0.5^21/21! relative to every entry.
    n_terms = n + 20
    e = np.eye(n)
    for k in range(n_terms, 0, -1):
        e = np.eye(n) + (b @ e) / k
    p = math.exp(-c * tau) * e
    for _ in range(squarings):
        p = p @ p
    return p


def hypoexp_cdf(means: Sequence[float], t: float) -> float:
    """P(E_1 + ... + E_L <= t) for independent exponentials with the given means.

    Works for repeated means; 1 <= L <= 16.
    """
    means = [float(m) for m in means]
    if not 1 <= len(means) <= MAX_HYPOEXP_DIM:
        raise DomainError(f"need 1 to {MAX_HYPOEXP_DIM} means, got {len(means)}")
    for m in means:
        if not (math.isfinite(m) and m > 0):
            raise DomainError(f"means must be positive and finite, got {m!r}")
    _check_nonneg("t", t)
    if t == 0.0:
        return 0.0
    gen = BidiagonalGenerator(tuple(1.0 / m for m in means))
    p = expm_stochastic(gen.absorbing_generator(), t)
    absorbed = p[0, -1]
    if absorbed > 0.5:
        # near 1 the transient mass is the accurately known quantity
        absorbed = 1.0 - float(np.sum(p[0, :-1]))
    return float(min(1.0, max(0.0, absorbed)))
