# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: cell-series cumulant scan and log-domain convolution.

Mirrors cwphase._kernels_py term for term; the stop rule and the moment
formulas must stay in lockstep with the pure version.
"""
from libc.math cimport exp, log, lgamma, INFINITY

import numpy as np

BACKEND = "compiled"


def cumulant_scan(double x, double q, double ln_upsilon, double ln_rel_tol,
                  int min_terms, int max_terms):
    cdef double t = ln_upsilon + x
    if t == -INFINITY:
        return 0.0, 0.0, 0.0, 0.0, 0, 1

    cdef Py_ssize_t n = 0, n_peak = 0, n_terms = -1
    cdef double L, Lmax = -INFINITY
    while n < max_terms:
        L = t * n - lgamma(n + 1.0) - 0.5 * q * n * n
        if L > Lmax:
            Lmax = L
            n_peak = n
        if n - n_peak >= min_terms and L - Lmax < ln_rel_tol:
            n_terms = n + 1
            break
        n += 1
    if n_terms < 0:
        return 0.0, 0.0, 0.0, 0.0, 0, -1

    cdef double s0 = 0.0, s1 = 0.0, w
    for n in range(n_terms):
        w = exp(t * n - lgamma(n + 1.0) - 0.5 * q * n * n - Lmax)
        s0 += w
        s1 += w * n
    cdef double m1 = s1 / s0, d, m2 = 0.0, m3 = 0.0
    for n in range(n_terms):
        w = exp(t * n - lgamma(n + 1.0) - 0.5 * q * n * n - Lmax)
        d = n - m1
        m2 += w * d * d
        m3 += w * d * d * d
    return Lmax + log(s0), m1, m2 / s0, m3 / s0, n_peak, n_terms


def log_conv_step(log_c_in, log_pi_in):
    cdef double[::1] log_c = np.ascontiguousarray(log_c_in, dtype=np.float64)
    cdef double[::1] log_pi = np.ascontiguousarray(log_pi_in, dtype=np.float64)
    cdef Py_ssize_t nc = log_c.shape[0], npi = log_pi.shape[0]
    out_arr = np.empty(nc + npi - 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t m, j, jlo, jhi
    cdef double vmax, s, v
    for m in range(nc + npi - 1):
        jlo = m - nc + 1 if m >= nc else 0
        jhi = npi - 1 if m >= npi - 1 else m
        vmax = -INFINITY
        for j in range(jlo, jhi + 1):
            v = log_pi[j] + log_c[m - j]
            if v > vmax:
                vmax = v
        if vmax == -INFINITY:
            out[m] = -INFINITY
            continue
        s = 0.0
        for j in range(jlo, jhi + 1):
            v = log_pi[j] + log_c[m - j]
            if v != -INFINITY:
                s += exp(v - vmax)
        out[m] = vmax + log(s)
    return out_arr
