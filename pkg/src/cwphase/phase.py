"""Phase classification, the branch-difference function D, coexistence and
the critical point.

Inside the metastable window M_p = (mu_bottom, mu_top) the landscape E has
two competing maxima; D(mu) = E(high branch) - E(low branch) increases
strictly with mu and its unique zero mu_c is the coexistence chemical
potential (Maxwell rule).  The critical coupling p_c solves V(p) = 1 with
V(p) the height of the first local maximum of x -> p*phi2(x, p), where the
window collapses to a point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParamsError, NoConvergenceError, PreconditionError
from .params import DEFAULT_ACCURACY, ModelParams, SeriesAccuracy, ThermoPoint
from .series import big_e, moment_sums, tail_variance_limit
from .stationary import (KIND_TOL, SpinodalInterval, StationaryPoint, _first_hump,
                         spinodal, stationary_points)

# branch mu-windows may extend a relative EDGE_FRACTION past their exact
# edges, where the vanished branch is continued by its frozen turning value
EDGE_FRACTION = 1e-4


def _tie_tol(e_value: float) -> float:
    return 1e-9 * max(1.0, abs(e_value))


@dataclass(frozen=True)
class PhaseClassification:
    """Global-maximum structure of E at one (p, mu) point.

    status: "single_phase" (unique nondegenerate global maximum),
    "coexistence_candidate" (two maxima tied within tie tolerance) or
    "degenerate_critical" (the global maximum has |E2| <= KIND_TOL).
    gap = E(best) - E(runner-up maximum), +inf when the maximum is unique.
    """

    status: str
    global_max: StationaryPoint
    all_points: tuple
    gap: float


@dataclass(frozen=True)
class CoexistenceResult:
    """Solution of D(mu) = 0 at fixed p: tied maxima and their shared pressure."""

    mu_c: float
    y_low: float
    y_high: float
    pressure: float
    window: SpinodalInterval
    d_residual: float


@dataclass(frozen=True)
class CriticalPoint:
    """Collapse point of the first metastable window: p*phi2 = 1, phi3 = 0."""

    p_c: float
    x_c: float
    y_c: float
    n_c: float


def classify(pt: ThermoPoint, params: ModelParams,
             acc: SeriesAccuracy = DEFAULT_ACCURACY) -> PhaseClassification:
    """Classify (p, mu) by the global maxima of E."""
    points = stationary_points(pt, params, acc)
    best = max(points, key=lambda s: s.e_value)
    rivals = [s for s in points if s is not best and s.kind in ("maximum", "degenerate")]
    gap = best.e_value - max(r.e_value for r in rivals) if rivals else math.inf
    if best.kind == "degenerate":
        status = "degenerate_critical"
    elif rivals and gap <= _tie_tol(best.e_value):
        status = "coexistence_candidate"
    else:
        status = "single_phase"
    return PhaseClassification(status=status, global_max=best, all_points=points, gap=gap)


def _outer_maximum(p: float, pt: ThermoPoint, params: ModelParams,
                   acc: SeriesAccuracy, win: SpinodalInterval, low_side: bool):
    """Maximum of E just outside one spinodal edge, chased from that edge.

    At the edges g(x) = x - p*phi1 - mu equals mu_top - mu (left) and
    mu_bottom - mu (right), so its sign is known for mu inside the window
    and the outer root brackets in a short outward walk.  Returns None
    when roundoff already erased that sign (branch dies at this mu).
    """
    mu = pt.mu

    def g(x: float) -> float:
        return x - p * moment_sums(x, params, p, acc).phi1 - mu

    x_edge = win.x_lo if low_side else win.x_hi
    direction = -1.0 if low_side else 1.0
    g_edge = g(x_edge)
    if (g_edge <= 0.0) if low_side else (g_edge >= 0.0):
        return None
    step = max(1e-7, 0.5 * (win.x_hi - win.x_lo))
    bound = 3.0 * params.a * p + 60.0
    x_prev = x_edge
    x_cur = x_edge
    for _ in range(200):
        x_cur = x_cur + direction * step
        step *= 1.6
        g_cur = g(x_cur)
        if (g_cur < 0.0) if low_side else (g_cur > 0.0):
            break
        x_prev = x_cur
        if abs(x_cur - x_edge) > bound:
            raise NoConvergenceError(
                "no-convergence", f"outer stationary point not bracketed from x={x_edge}")
    else:
        raise NoConvergenceError(
            "no-convergence", f"outer stationary point not bracketed from x={x_edge}")
    xr = brentq(g, min(x_prev, x_cur), max(x_prev, x_cur),
                xtol=1e-14, rtol=8.9e-16, maxiter=200)
    y = xr - mu
    ms = moment_sums(xr, params, p, acc)
    curv = -1.0 / p + ms.phi2
    if curv < -KIND_TOL:
        kind = "maximum"
    elif curv > KIND_TOL:
        kind = "minimum"
    else:
        kind = "degenerate"
    return StationaryPoint(x=xr, y=y, e_value=-y * y / (2 * p) + ms.phi,
                           curvature=curv, kind=kind)


def _branch_energies(p: float, mu: float, params: ModelParams, acc: SeriesAccuracy,
                     win: SpinodalInterval):
    """E on the low and high branches at mu, extending each branch by its
    frozen spinodal-edge value within EDGE_FRACTION*width past the window.

    Returns (e_low, e_high, low_point, high_point); a continued branch has
    point = None.
    """
    edge = EDGE_FRACTION * win.width
    if not (win.mu_bottom - edge <= mu <= win.mu_top + edge):
        raise PreconditionError(
            "outside-window",
            f"mu={mu} outside metastable window [{win.mu_bottom}, {win.mu_top}] "
            f"(edge tolerance {edge:g})")
    pt = ThermoPoint(p=p, mu=mu)
    points = stationary_points(pt, params, acc)
    maxima = [s for s in points if s.kind in ("maximum", "degenerate")]
    y_tol = 1e-9 * (1.0 + abs(win.y_lo))
    lows = [m for m in maxima if m.y <= win.y_lo + y_tol]
    highs = [m for m in maxima if m.y >= win.y_hi - y_tol]

    if lows:
        low_pt = max(lows, key=lambda m: m.y)
        e_low = low_pt.e_value
    elif mu >= win.mu_top - edge:
        # low maximum annihilated at the left spinodal edge: continue it there
        low_pt = None
        e_low = big_e(win.y_lo, pt, params, acc)
    else:
        # hairline windows hide the outer roots from the walk resolution
        low_pt = _outer_maximum(p, pt, params, acc, win, low_side=True)
        e_low = low_pt.e_value if low_pt is not None else big_e(win.y_lo, pt, params, acc)

    if highs:
        high_pt = min(highs, key=lambda m: m.y)
        e_high = high_pt.e_value
    elif mu <= win.mu_bottom + edge:
        high_pt = None
        e_high = big_e(win.y_hi, pt, params, acc)
    else:
        high_pt = _outer_maximum(p, pt, params, acc, win, low_side=False)
        e_high = high_pt.e_value if high_pt is not None else big_e(win.y_hi, pt, params, acc)

    return e_low, e_high, low_pt, high_pt


def d_of_mu(p: float, mu: float, params: ModelParams,
            acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """D(mu) = E(high branch) - E(low branch) at coupling p.

    Defined on the metastable window (plus the EDGE_FRACTION continuation);
    strictly increasing, zero at the coexistence point.
    """
    mu = float(mu)
    if not math.isfinite(mu):
        raise InvalidParamsError("invalid-params", f"mu must be finite, got {mu!r}")
    win = spinodal(p, params, acc)
    if win is None:
        raise PreconditionError("no-spinodal", f"no metastable window at p={p}")
    e_low, e_high, _, _ = _branch_energies(p, mu, params, acc, win)
    return e_high - e_low


def branch_energies(p: float, mu: float, params: ModelParams,
                    acc: SeriesAccuracy = DEFAULT_ACCURACY) -> tuple:
    """(E_low, E_high) at mu inside the metastable window (edges continued)."""
    win = spinodal(p, params, acc)
    if win is None:
        raise PreconditionError("no-spinodal", f"no metastable window at p={p}")
    e_low, e_high, _, _ = _branch_energies(p, float(mu), params, acc, win)
    return e_low, e_high


def coexistence_mu(p: float, params: ModelParams,
                   acc: SeriesAccuracy = DEFAULT_ACCURACY) -> CoexistenceResult:
    """Solve D(mu) = 0 inside the metastable window at coupling p."""
    win = spinodal(p, params, acc)
    if win is None:
        raise PreconditionError("no-spinodal", f"no metastable window at p={p}")
    width = win.width

    delta = 1e-6 * width
    lo = hi = None
    mu_c = None
    for _ in range(4):
        lo_try = win.mu_bottom + delta
        hi_try = win.mu_top - delta
        el_lo, eh_lo, _, _ = _branch_energies(p, lo_try, params, acc, win)
        el_hi, eh_hi, _, _ = _branch_energies(p, hi_try, params, acc, win)
        d_lo = eh_lo - el_lo
        d_hi = eh_hi - el_hi
        # below this floor a branch-height difference is evaluation roundoff,
        # not a resolvable sign (hairline windows near the critical point)
        floor = 4e-16 * max(1.0, abs(el_lo), abs(eh_lo), abs(el_hi), abs(eh_hi))
        if d_lo < -floor and d_hi > floor:
            lo, hi = lo_try, hi_try
            break
        if abs(d_lo) <= floor and abs(d_hi) <= floor:
            mu_c = 0.5 * (lo_try + hi_try)
            break
        if abs(d_lo) <= floor:
            mu_c = lo_try
            break
        if abs(d_hi) <= floor:
            mu_c = hi_try
            break
        delta *= 0.1
    if mu_c is None:
        if lo is None:
            raise NoConvergenceError(
                "no-convergence",
                f"D(mu) does not change sign inside the window at p={p}")
        mu_c = brentq(lambda m: d_of_mu(p, m, params, acc), lo, hi,
                      xtol=1e-14 * max(1.0, abs(win.mu_bottom)), rtol=8.9e-16, maxiter=200)

    e_low, e_high, low_pt, high_pt = _branch_energies(p, mu_c, params, acc, win)
    if low_pt is None or high_pt is None:
        raise NoConvergenceError("no-convergence", "coexistence landed on a window edge")
    scale = max(1.0, abs(e_low), abs(e_high))
    resid = e_high - e_low
    # Newton polish: dD/dmu = (y_high - y_low)/p
    for _ in range(3):
        if abs(resid) <= 1e-10 * scale:
            break
        slope = (high_pt.y - low_pt.y) / p
        if slope <= 0.0:
            break
        mu_c -= resid / slope
        e_low, e_high, low_pt, high_pt = _branch_energies(p, mu_c, params, acc, win)
        if low_pt is None or high_pt is None:
            raise NoConvergenceError("no-convergence", "coexistence polish left the window")
        resid = e_high - e_low
    if abs(resid) > 1e-10 * scale:
        raise NoConvergenceError("no-convergence",
                                 f"|D(mu_c)| = {abs(resid):g} above tolerance at p={p}")
    if params.upsilon <= 0.0:
        raise InvalidParamsError("invalid-params", "pressure needs upsilon > 0")
    return CoexistenceResult(
        mu_c=mu_c, y_low=low_pt.y, y_high=high_pt.y,
        pressure=0.5 * (e_low + e_high) / params.upsilon,
        window=win, d_residual=resid)


def critical_point(params: ModelParams,
                   acc: SeriesAccuracy = DEFAULT_ACCURACY) -> CriticalPoint:
    """Solve V(p) = 1 for the critical coupling, V = first-hump height of p*phi2.

    Bracket [0.5, 8] is doubled outward while the sign condition fails; a
    64-point scan guards against multiple crossings before brentq.
    """
    if params.upsilon <= 0.0:
        raise InvalidParamsError("invalid-params", "critical_point needs upsilon > 0")

    def v_minus_1(p: float) -> float:
        return _first_hump(p, params, acc)[1] - 1.0

    lo, hi = 0.5, 8.0
    f_lo = v_minus_1(lo)
    f_hi = v_minus_1(hi)
    for _ in range(60):
        if f_lo < 0.0:
            break
        lo *= 0.5
        f_lo = v_minus_1(lo)
    else:
        raise NoConvergenceError("no-bracket", "V(p) - 1 has no sign change (lower end)")
    for _ in range(60):
        if f_hi > 0.0:
            break
        hi *= 2.0
        f_hi = v_minus_1(hi)
    else:
        raise NoConvergenceError("no-bracket", "V(p) - 1 has no sign change (upper end)")

    grid = np.linspace(lo, hi, 64)
    vals = [f_lo] + [v_minus_1(p) for p in grid[1:-1]] + [f_hi]
    crossings = [i for i in range(len(vals) - 1)
                 if (vals[i] < 0.0 <= vals[i + 1]) or (vals[i] > 0.0 >= vals[i + 1])]
    if len(crossings) != 1:
        raise NoConvergenceError("no-convergence",
                                 f"V(p) - 1 crosses zero {len(crossings)} times in [{lo}, {hi}]")
    i = crossings[0]
    p_c = brentq(v_minus_1, grid[i], grid[i + 1], xtol=1e-12, rtol=8.9e-16, maxiter=200)
    x_c, _ = _first_hump(p_c, params, acc)
    ms = moment_sums(x_c, params, p_c, acc)
    y_c = p_c * ms.phi1
    return CriticalPoint(p_c=p_c, x_c=x_c, y_c=y_c, n_c=y_c / p_c)


def line_is_single_phase(p: float, params: ModelParams,
                         acc: SeriesAccuracy = DEFAULT_ACCURACY) -> bool:
    """True iff sup_x p*phi2(x, p) < 1, i.e. E is strictly concave-at-maxima
    for every mu and the whole line {p} x R is one phase.

    Checks the occupancy humps on a finite scan plus the exact tail limit
    p * tail_variance_limit(a*p), which dominates all humps.
    """
    p = float(p)
    if not (math.isfinite(p) and p >= 0.0):
        raise InvalidParamsError("invalid-params", f"p must be finite and >= 0, got {p!r}")
    if p == 0.0 or params.upsilon == 0.0:
        return True
    q = params.a * p
    if p * tail_variance_limit(q) > 1.0:
        return False

    def v(x: float) -> float:
        try:
            return p * moment_sums(x, params, p, acc).phi2
        except NoConvergenceError:
            if q < 0.05:
                # occupation peak beyond the summation cap: deep continuum
                # regime, variance <= 1/q up to corrections below double
                # precision, so p*phi2 <= 1/a < 1 at this x
                return 1.0 / params.a
            raise

    ln_ups = params.ln_upsilon
    lo = min(0.0, 0.5 * q - ln_ups) - 10.0
    hi = 8.5 * q + 3.0 + max(0.0, -ln_ups)
    if q * params.upsilon < math.exp(1.0):
        hi = max(hi, 1.0 - math.log(q * params.upsilon) + 8.0)
    hi = max(hi, lo + 8.0)

    from scipy.optimize import minimize_scalar

    step = 0.25
    xs = lo
    v2 = v(xs)
    v1 = v(xs + step)
    best = max(v2, v1)
    x = xs + 2 * step
    while x <= hi:
        vc = v(x)
        if v1 > v2 and v1 > vc:
            res = minimize_scalar(lambda t: -v(t), bounds=(x - 2 * step, x),
                                  method="bounded", options={"xatol": 1e-10})
            best = max(best, -res.fun)
            if best >= 1.0:
                return False
        best = max(best, vc)
        v2, v1 = v1, vc
        x += step
    return best < 1.0
