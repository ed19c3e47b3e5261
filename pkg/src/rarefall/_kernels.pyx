# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampler kernels.

Drop-in replacement for ``rarefall._fallback``; every function has the
same signature and returns the same values up to rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, M_PI

cnp.import_array()

cdef double _ASYMPTOTIC_SWITCH = 30.0
cdef double _RTOL = 1e-16


cdef inline double _log_i0(double x) noexcept nogil:
    cdef double q, term, total, k
    if x <= _ASYMPTOTIC_SWITCH:
        q = 0.25 * x * x
        term = 1.0
        total = 1.0
        k = 0.0
        while True:
            k += 1.0
            term *= q / (k * k)
            total += term
            if term < _RTOL * total and k * k > q:
                break
        return log(total)
    term = 1.0
    total = 1.0
    k = 0.0
    while k < 200.0:
        k += 1.0
        term *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x)
        total += term
        if term < _RTOL * total:
            break
    return x - 0.5 * log(2.0 * M_PI * x) + log(total)


def log_i0(x):
    cdef cnp.ndarray[double, ndim=1] flat = np.ascontiguousarray(x, dtype=float).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i, n = flat.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _log_i0(flat[i])
    return out.reshape(np.shape(x))


def log_accept_linear(const double[:, :] u, const double[:] w):
    cdef Py_ssize_t n = u.shape[0], L = u.shape[1], i, j
    cdef double s
    out = np.empty(n)
    cdef double[:] o = out
    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(L):
                s += w[j] * u[i, j]
            o[i] = -s
    return out


def log_accept_rows(const double[:, :] u, const double[:, :] w):
    cdef Py_ssize_t n = u.shape[0], L = u.shape[1], i, j
    cdef double s
    out = np.empty(n)
    cdef double[:] o = out
    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(L):
                s += w[i, j] * u[i, j]
            o[i] = -s
    return out


def log_accept_corr(const double[:, :] u, const double[:] weights, double kappa):
    cdef Py_ssize_t n = u.shape[0], L = u.shape[1], i, j
    cdef double s, ref
    out = np.empty(n)
    cdef double[:] o = out
    with nogil:
        ref = _log_i0(kappa) if kappa > 0.0 else 0.0
        for i in range(n):
            s = 0.0
            for j in range(L):
                s += weights[j] * u[i, j]
            s = -s
            if kappa > 0.0:
                for j in range(L - 1):
                    s += _log_i0(kappa * sqrt(u[i, j] * u[i, j + 1])) - ref
            o[i] = s
    return out


def log_accept_rice(const double[:, :] u, double rate, double beta):
    cdef Py_ssize_t n = u.shape[0], L = u.shape[1], i, j
    cdef double s, ssum, ref
    out = np.empty(n)
    cdef double[:] o = out
    with nogil:
        ref = _log_i0(beta) if beta > 0.0 else 0.0
        for i in range(n):
            ssum = 0.0
            s = 0.0
            for j in range(L):
                ssum += u[i, j]
                if beta > 0.0:
                    s += _log_i0(beta * sqrt(u[i, j])) - ref
            o[i] = s - rate * ssum
    return out


def ordered_gains(const double[:, :] g, const double[:] alphas):
    cdef Py_ssize_t n = g.shape[0], L = g.shape[1], i, j
    cdef double acc
    out = np.empty((n, L))
    cdef double[:, :] o = out
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(L - 1, -1, -1):
                acc += g[i, j] / alphas[j]
                o[i, j] = acc
    return out


def count_sum_le(const double[:, :] r, Py_ssize_t ncols, double limit):
    cdef Py_ssize_t n = r.shape[0], i, j
    cdef Py_ssize_t count = 0
    cdef double s
    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(ncols):
                s += r[i, j]
            if s <= limit:
                count += 1
    return count


def count_sqrt_sum_le(const double[:, :] y, Py_ssize_t ncols, double limit):
    cdef Py_ssize_t n = y.shape[0], i, j
    cdef Py_ssize_t count = 0
    cdef double s
    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(ncols):
                s += sqrt(y[i, j])
            if s <= limit:
                count += 1
    return count
