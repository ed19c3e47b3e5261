"""Pure NumPy versions of the sampler kernels.

Same signatures and results (up to rounding) as the compiled ``_kernels``
extension; used when the extension is not built or when
``RAREFALL_PURE_PYTHON`` is set.
"""

import math

import numpy as np

_ASYMPTOTIC_SWITCH = 30.0
_RTOL = 1e-16


def log_i0(x):
    """Elementwise log I0(x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= _ASYMPTOTIC_SWITCH
    if small.any():
        xs = x[small]
        q = 0.25 * xs * xs
        term = np.ones_like(xs)
        total = np.ones_like(xs)
        k = 0
        active = np.ones(xs.shape, dtype=bool)
        while active.any():
            k += 1
            term = term * q / (k * k)
            total = total + term
            active = (term >= _RTOL * total) | (k * k <= q)
        out[small] = np.log(total)
    big = ~small
    if big.any():
        xb = x[big]
        term = np.ones_like(xb)
        total = np.ones_like(xb)
        for k in range(1, 200):
            term = term * (2 * k - 1) ** 2 / (8.0 * k * xb)
            total = total + term
            if np.all(term < _RTOL * total):
                break
        out[big] = xb - 0.5 * np.log(2.0 * math.pi * xb) + np.log(total)
    return out


def log_accept_linear(u, w):
    """-sum_j w[j] * u[i, j] for every proposal row."""
    return -(np.asarray(u) @ np.asarray(w))


def log_accept_rows(u, w):
    """-sum_j w[i, j] * u[i, j], coefficients given per row."""
    return -np.einsum("ij,ij->i", u, w)


def log_accept_corr(u, weights, kappa):
    """Correlated-Rayleigh log acceptance.

    ``weights`` holds the quadratic-form coefficients already multiplied by
    g0^2/2; ``kappa`` = rho g0^2 / ((1 - rho^2) sigma^2).
    """
    logacc = -(u @ weights)
    if kappa > 0.0 and u.shape[1] > 1:
        arg = kappa * np.sqrt(u[:, :-1] * u[:, 1:])
        logacc += log_i0(arg).sum(axis=1) - (u.shape[1] - 1) * float(log_i0(np.array([kappa]))[0])
    return logacc


def log_accept_rice(u, rate, beta):
    """i.i.d. Rice log acceptance.

    ``rate`` = (K+1) g0^2 / Omega and ``beta`` = 2 sqrt(K (K+1) g0^2 / Omega).
    """
    logacc = -rate * u.sum(axis=1)
    if beta > 0.0:
        logacc += log_i0(beta * np.sqrt(u)).sum(axis=1) - u.shape[1] * float(log_i0(np.array([beta]))[0])
    return logacc


def ordered_gains(g, alphas):
    """Ordered gains h^(l)/g0^2 from simplex coordinates G_l = alpha_l X_l / g0^2."""
    x = g / alphas
    return np.cumsum(x[:, ::-1], axis=1)[:, ::-1]


def count_sum_le(r, ncols, limit):
    """Number of rows whose first ``ncols`` entries sum to at most ``limit``."""
    return int(np.count_nonzero(r[:, :ncols].sum(axis=1) <= limit))


def count_sqrt_sum_le(y, ncols, limit):
    """Number of rows with sum_{j < ncols} sqrt(y[i, j]) <= limit."""
    return int(np.count_nonzero(np.sqrt(y[:, :ncols]).sum(axis=1) <= limit))
