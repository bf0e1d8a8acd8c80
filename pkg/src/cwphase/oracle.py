"""Finite-N validation oracle.

The N-cell partition function is computed exactly (up to an occupation cap
per cell) by grouping states over the total particle number M:

    Xi_N = sum_M exp(p M^2 / (2N)) c_N(M),

with c_N the N-fold convolution of the bare cell weights pi(n).  The same
quantity has the exact integral form

    Xi_N = sqrt(N / (2 pi p)) * integral exp(N E(y, p, mu)) dy,

evaluated here by adaptive quadrature; agreement of the two is a strong
end-to-end check, and P_N = ln Xi_N / (upsilon N) converges to the
limiting pressure P on single-phase points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from ._backend import log_conv_step
from .errors import InvalidParamsError, NoConvergenceError, PreconditionError
from .params import DEFAULT_ACCURACY, ModelParams, SeriesAccuracy, ThermoPoint
from .series import big_e, moment_sums
from .stationary import stationary_points
from .thermo import pressure
from .phase import classify

_CAP_LIMIT = 16384
_WINDOW_DEFICIT = 50.0


@dataclass(frozen=True)
class FiniteNResult:
    """Exact finite-N partition data at the occupation cap n_max.

    cap_sensitivity = |log_xi(n_max + 8) - log_xi(n_max)|; p_n is the
    finite-N pressure ln Xi / (upsilon N).
    """

    n_cells: int
    n_max: int
    log_xi: float
    p_n: float
    cap_sensitivity: float


@dataclass(frozen=True)
class ConvergenceRow:
    n_cells: int
    p_n: float
    p_limit: float
    gap: float


def cell_weight(n: int, pt: ThermoPoint, params: ModelParams) -> float:
    """ln pi(n) = n ln(upsilon) - ln n! + mu n - (a p / 2) n^2; -inf allowed."""
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise InvalidParamsError("invalid-params", f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    if n == 0:
        return 0.0
    if params.upsilon == 0.0:
        return -math.inf
    q = params.a * pt.p
    return (n * params.ln_upsilon - math.lgamma(n + 1.0)
            + pt.mu * n - 0.5 * q * n * n)


def _log_pi(pt: ThermoPoint, params: ModelParams, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1, dtype=np.float64)
    if params.upsilon == 0.0:
        out = np.full(n_max + 1, -np.inf)
        out[0] = 0.0
        return out
    q = params.a * pt.p
    return n * params.ln_upsilon - gammaln(n + 1.0) + pt.mu * n - 0.5 * q * n * n


def _log_xi_at_cap(n_cells: int, pt: ThermoPoint, params: ModelParams, n_max: int) -> float:
    log_pi = _log_pi(pt, params, n_max)
    c = log_pi.copy()
    for _ in range(n_cells - 1):
        c = log_conv_step(c, log_pi)
    m = np.arange(c.size, dtype=np.float64)
    t = 0.5 * pt.p * m * m / n_cells + c
    t_max = np.max(t)
    if t_max == -np.inf:
        return 0.0 if params.upsilon == 0.0 else -math.inf
    return float(t_max + np.log(np.sum(np.exp(t - t_max))))


def exact_log_xi(n_cells: int, pt: ThermoPoint, params: ModelParams,
                 n_max: int | None = None) -> FiniteNResult:
    """ln Xi_N by iterated log-domain convolution.

    The occupation cap starts at n_max (or a heuristic) and doubles until
    raising it by 8 moves ln Xi by at most 1e-10 relative; exceeding the
    escalation ceiling raises cap-escalation-failed.
    """
    if isinstance(n_cells, bool) or int(n_cells) != n_cells or n_cells < 1:
        raise InvalidParamsError("invalid-params",
                                 f"n_cells must be a positive integer, got {n_cells!r}")
    n_cells = int(n_cells)
    if n_max is None:
        nm = max(16, math.ceil(8.0 * params.upsilon * math.exp(min(pt.mu, 3.0))))
    else:
        if int(n_max) != n_max or n_max < 1:
            raise InvalidParamsError("invalid-params", f"n_max must be >= 1, got {n_max!r}")
        nm = int(n_max)

    while True:
        lx = _log_xi_at_cap(n_cells, pt, params, nm)
        lx8 = _log_xi_at_cap(n_cells, pt, params, nm + 8)
        sens = abs(lx8 - lx)
        if sens <= 1e-10 * max(1.0, abs(lx)):
            p_n = lx / (params.upsilon * n_cells) if params.upsilon > 0.0 else 0.0
            return FiniteNResult(n_cells=n_cells, n_max=nm, log_xi=lx, p_n=p_n,
                                 cap_sensitivity=sens)
        if nm >= _CAP_LIMIT:
            raise NoConvergenceError(
                "cap-escalation-failed",
                f"ln Xi still moves {sens:g} at n_max={nm} for N={n_cells}")
        nm = min(2 * nm, _CAP_LIMIT)


def laplace_log_xi(n_cells: int, pt: ThermoPoint, params: ModelParams,
                   acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """ln Xi_N through the one-dimensional integral representation.

    Integrates exp(N(E - E_max)) over the window where N*E is within
    _WINDOW_DEFICIT of its maximum, with the stationary points passed as
    quadrature breakpoints.
    """
    if isinstance(n_cells, bool) or int(n_cells) != n_cells or n_cells < 1:
        raise InvalidParamsError("invalid-params",
                                 f"n_cells must be a positive integer, got {n_cells!r}")
    n_cells = int(n_cells)
    if pt.p <= 0.0:
        raise InvalidParamsError("invalid-params", "laplace_log_xi needs p > 0")

    points = stationary_points(pt, params, acc)
    e_max = max(s.e_value for s in points)
    deficit = _WINDOW_DEFICIT / n_cells
    target = e_max - deficit

    def e_of(y: float) -> float:
        return big_e(y, pt, params, acc)

    y_left = min(s.y for s in points)
    y_right = max(s.y for s in points)
    lo = y_left - 0.1
    step = 0.1
    while e_of(lo) > target:
        step *= 2.0
        lo -= step
        if step > 1e6:
            raise NoConvergenceError("quadrature-no-convergence", "left window edge not found")
    hi = y_right + 0.1
    step = 0.1
    while e_of(hi) > target:
        step *= 2.0
        hi += step
        if step > 1e6:
            raise NoConvergenceError("quadrature-no-convergence", "right window edge not found")

    interior = sorted(s.y for s in points if lo < s.y < hi)

    def integrand(y: float) -> float:
        return math.exp(n_cells * (e_of(y) - e_max))

    val, err = quad(integrand, lo, hi, points=interior or None, limit=300,
                    epsabs=1e-14, epsrel=1e-12)
    if not (val > 0.0) or err > 1e-8 * val:
        raise NoConvergenceError("quadrature-no-convergence",
                                 f"quadrature error {err:g} on value {val:g}")
    return 0.5 * math.log(n_cells / (2.0 * math.pi * pt.p)) + n_cells * e_max + math.log(val)


def convergence_report(pt: ThermoPoint, params: ModelParams, n_list,
                       acc: SeriesAccuracy = DEFAULT_ACCURACY) -> tuple:
    """Rows (N, P_N, P_limit, gap) for each N in n_list.

    Precondition: (p, mu) is single-phase, so that P_limit = lim P_N is
    the unique-branch pressure.  p = 0 is the decoupled boundary with
    P_limit = phi(mu, 0)/upsilon.
    """
    if params.upsilon <= 0.0:
        raise InvalidParamsError("invalid-params", "convergence_report needs upsilon > 0")
    ns = [int(n) for n in n_list]
    if not ns or any(n < 1 for n in ns):
        raise InvalidParamsError("invalid-params", f"n_list must hold positive integers: {n_list!r}")
    if pt.p == 0.0:
        p_limit = moment_sums(pt.mu, params, 0.0, acc).phi / params.upsilon
    else:
        c = classify(pt, params, acc)
        if c.status != "single_phase":
            raise PreconditionError("not-single-phase",
                                    f"convergence_report needs a single-phase point, got {c.status}")
        p_limit = pressure(pt, params, acc)
    rows = []
    for n in ns:
        r = exact_log_xi(n, pt, params)
        rows.append(ConvergenceRow(n_cells=n, p_n=r.p_n, p_limit=p_limit,
                                   gap=r.p_n - p_limit))
    return tuple(rows)
