"""Single-cell series and the landscape function E.

phi(x, p) = ln sum_{n>=0} (upsilon^n / n!) exp(x n - (a p / 2) n^2) and its
first three cumulants phi1, phi2, phi3 (mean, variance, third central
moment of the normalized cell weights).  The landscape

    E(y, p, mu) = -y^2 / (2 p) + phi(y + mu, p)

drives everything downstream: stationary points of E in y are the
candidate phases, E1 and E2 are its first two y-derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._backend import cumulant_scan
from .errors import InvalidParamsError, NoConvergenceError
from .params import DEFAULT_ACCURACY, ModelParams, SeriesAccuracy, ThermoPoint


@dataclass(frozen=True)
class MomentSums:
    """phi and the cumulants of the cell-occupation weights at one field value.

    n_peak indexes the largest series term, n_terms counts terms kept by
    the truncation rule.
    """

    phi: float
    phi1: float
    phi2: float
    phi3: float
    n_peak: int
    n_terms: int


def _check_x(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidParamsError("invalid-params", f"x must be finite, got {x!r}")
    return x


def _check_p(p: float) -> float:
    p = float(p)
    if not (math.isfinite(p) and p >= 0.0):
        raise InvalidParamsError("invalid-params", f"p must be finite and >= 0, got {p!r}")
    return p


def moment_sums(x: float, params: ModelParams, p: float,
                acc: SeriesAccuracy = DEFAULT_ACCURACY) -> MomentSums:
    """Evaluate phi(x, p) and its cumulants at field x.

    Raises no-convergence with code "cap-exceeded" when acc.max_terms is
    reached before the stop rule fires (peak of the series beyond reach).
    """
    x = _check_x(x)
    p = _check_p(p)
    q = params.a * p
    phi, m1, m2, m3, n_peak, n_terms = cumulant_scan(
        x, q, params.ln_upsilon, math.log(acc.rel_tol), acc.min_terms, acc.max_terms)
    if n_terms < 0:
        raise NoConvergenceError(
            "cap-exceeded",
            f"series at x={x}, p={p} did not settle within max_terms={acc.max_terms}")
    return MomentSums(phi=phi, phi1=m1, phi2=m2, phi3=m3, n_peak=n_peak, n_terms=n_terms)


def big_e(y: float, pt: ThermoPoint, params: ModelParams,
          acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """E(y, p, mu) = -y^2/(2p) + phi(y + mu, p).  Needs p > 0."""
    y = float(y)
    if not math.isfinite(y):
        raise InvalidParamsError("invalid-params", f"y must be finite, got {y!r}")
    if pt.p <= 0.0:
        raise InvalidParamsError("invalid-params", "big_e needs p > 0")
    ms = moment_sums(y + pt.mu, params, pt.p, acc)
    return -0.5 * y * y / pt.p + ms.phi


def e1(y: float, pt: ThermoPoint, params: ModelParams,
       acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """First y-derivative of E: -y/p + phi1(y + mu, p)."""
    y = float(y)
    if not math.isfinite(y):
        raise InvalidParamsError("invalid-params", f"y must be finite, got {y!r}")
    if pt.p <= 0.0:
        raise InvalidParamsError("invalid-params", "e1 needs p > 0")
    ms = moment_sums(y + pt.mu, params, pt.p, acc)
    return -y / pt.p + ms.phi1


def e2(y: float, pt: ThermoPoint, params: ModelParams,
       acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Second y-derivative of E: -1/p + phi2(y + mu, p)."""
    y = float(y)
    if not math.isfinite(y):
        raise InvalidParamsError("invalid-params", f"y must be finite, got {y!r}")
    if pt.p <= 0.0:
        raise InvalidParamsError("invalid-params", "e2 needs p > 0")
    ms = moment_sums(y + pt.mu, params, pt.p, acc)
    return -1.0 / pt.p + ms.phi2


def tail_variance_limit(q: float) -> float:
    """Large-field limit of phi2(x) at damping q.

    As x grows the weights concentrate on the integers bracketing the
    drifting mean, and the variance oscillates; at the half-integer
    crossings it approaches

        sum_d d^2 exp(-q d^2 / 2) / sum_d exp(-q d^2 / 2),

    d ranging over half-integers, which is also the supremum of phi2 over
    the oscillatory tail.  Below q = 0.05 the discrete sum is within
    1e-40 of the continuum value 1/q.
    """
    q = float(q)
    if not (math.isfinite(q) and q > 0.0):
        raise InvalidParamsError("invalid-params", f"q must be finite and > 0, got {q!r}")
    if q < 0.05:
        return 1.0 / q
    # weights relative to the innermost pair d = +-1/2
    num = 0.25
    den = 1.0
    for k in range(1, 2048):
        d = k + 0.5
        r = math.exp(-0.5 * q * (d * d - 0.25))
        term = d * d * r
        num += term
        den += r
        if term < 1e-30:
            break
    return num / den
