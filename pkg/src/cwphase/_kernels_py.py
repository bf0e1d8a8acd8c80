"""Pure-numpy kernels, used when the compiled extension is unavailable.

Both backends implement the same two primitives with identical stop-rule
semantics; tests assert they agree to near machine precision.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

BACKEND = "python"


def cumulant_scan(x: float, q: float, ln_upsilon: float, ln_rel_tol: float,
                  min_terms: int, max_terms: int):
    """Sum the cell series at field ``x`` with quadratic damping ``q``.

    Term n has log-weight L(n) = n*(ln_upsilon + x) - ln n! - q*n^2/2.
    The scan stops at the first n that is at least ``min_terms`` past the
    running peak with L(n) - L_peak < ln_rel_tol.  Returns the tuple
    (phi, m1, m2, m3, n_peak, n_terms): the log-sum, the mean and the
    2nd/3rd central moments of the normalized weights, the peak index and
    the number of terms kept.  n_terms = -1 signals the max_terms cap.
    """
    t = ln_upsilon + x
    if t == -np.inf:
        # upsilon = 0: only the n = 0 term (weight 1) survives.
        return 0.0, 0.0, 0.0, 0.0, 0, 1

    L = np.empty(0, dtype=np.float64)
    n_terms = -1
    block = 256
    n0 = 0
    while n0 < max_terms:
        hi = min(n0 + block, max_terms)
        m = np.arange(n0, hi, dtype=np.float64)
        L = np.concatenate([L, t * m - gammaln(m + 1.0) - 0.5 * q * m * m])
        idx = np.arange(L.size, dtype=np.int64)
        run_max = np.maximum.accumulate(L)
        # first index where the running max was (strictly) raised
        is_new = np.empty(L.size, dtype=bool)
        is_new[0] = True
        is_new[1:] = run_max[1:] > run_max[:-1]
        run_peak = np.maximum.accumulate(np.where(is_new, idx, -1))
        stop = (idx - run_peak >= min_terms) & (L - run_max < ln_rel_tol)
        hit = np.nonzero(stop)[0]
        if hit.size:
            n_terms = int(hit[0]) + 1
            L = L[:n_terms]
            break
        n0 = hi
        block *= 2
    if n_terms < 0:
        return 0.0, 0.0, 0.0, 0.0, 0, -1

    n_peak = int(np.argmax(L))
    w = np.exp(L - L[n_peak])
    s0 = float(np.sum(w))
    n = np.arange(n_terms, dtype=np.float64)
    m1 = float(np.sum(w * n)) / s0
    d = n - m1
    m2 = float(np.sum(w * d * d)) / s0
    m3 = float(np.sum(w * d * d * d)) / s0
    return float(L[n_peak]) + float(np.log(s0)), m1, m2, m3, n_peak, n_terms


def log_conv_step(log_c, log_pi):
    """One log-domain convolution: out[m] = logsumexp_j(log_c[m-j] + log_pi[j])."""
    log_c = np.asarray(log_c, dtype=np.float64)
    log_pi = np.asarray(log_pi, dtype=np.float64)
    out = np.full(log_c.size + log_pi.size - 1, -np.inf)
    for j in range(log_pi.size):
        if log_pi[j] == -np.inf:
            continue
        seg = out[j:j + log_c.size]
        np.logaddexp(seg, log_c + log_pi[j], out=seg)
    return out
