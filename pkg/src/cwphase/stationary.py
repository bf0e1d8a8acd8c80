"""Stationary structure of E along an isotherm.

Stationary points of E(., p, mu) solve y = p*phi1(y + mu, p); in the field
variable x = y + mu that is the scalar root problem

    g(x) = x - p*phi1(x, p) - mu = 0.

g'(x) = 1 - p*phi2(x, p), so the spinodal points (E2 = 0) are exactly the
crossings p*phi2 = 1, and between them g decreases: that is the unstable
branch.  The scan below walks g over x with steps bounded by the global
slope bound |g'| <= max(1, p * tail_variance_limit(a*p) - 1), so a sign
change can never be skipped (nearly-degenerate root pairs with a g
excursion shallower than ~0.01 per 0.02 of x are below its resolution,
same as the 0.01-grid alternative).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from scipy.optimize import brentq, minimize_scalar

from .errors import InvalidParamsError, NoConvergenceError
from .params import DEFAULT_ACCURACY, ModelParams, SeriesAccuracy, ThermoPoint
from .series import moment_sums, tail_variance_limit

ROOT_TOL = 1e-12
KIND_TOL = 1e-8
# g-value under which a non-crossing extremum of g counts as a tangency
TANGENT_TOL = 1e-9


@dataclass(frozen=True)
class StationaryPoint:
    """One solution of E1 = 0: location, value and local character of E.

    kind is "maximum"/"minimum" by the sign of curvature = E2 outside
    +-KIND_TOL, "degenerate" inside.  boundary marks the upsilon = 0
    collapse point at y = 0.
    """

    x: float
    y: float
    e_value: float
    curvature: float
    kind: str
    boundary: bool = False


@dataclass(frozen=True)
class SpinodalInterval:
    """The x- and y-extent of the unstable branch, with its mu window.

    mu_top = mu_bar at y_lo, mu_bottom = mu_bar at y_hi; three stationary
    points exist exactly for mu strictly between mu_bottom and mu_top.
    multi_well reports that further coexistence windows exist at higher
    occupancy (tail limit of p*phi2 above 1); this interval is always the
    first one.
    """

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    mu_top: float
    mu_bottom: float
    multi_well: bool = False

    @property
    def width(self) -> float:
        return self.mu_top - self.mu_bottom


def _check_positive_p(p: float) -> float:
    p = float(p)
    if not (math.isfinite(p) and p > 0.0):
        raise InvalidParamsError("invalid-params", f"operation needs p > 0, got {p!r}")
    return p


def x_of_y(y: float, p: float, params: ModelParams,
           acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Invert y = p*phi1(x, p) for x; unique since phi2 > 0.

    Reports no-convergence below y = 1e-12 (x diverges to -infinity).
    """
    y = float(y)
    p = _check_positive_p(p)
    if not math.isfinite(y):
        raise InvalidParamsError("invalid-params", f"y must be finite, got {y!r}")
    if params.upsilon <= 0.0:
        raise InvalidParamsError("invalid-params", "x_of_y needs upsilon > 0 (phi1 vanishes)")
    if y < 1e-12:
        raise NoConvergenceError("no-convergence", f"x(y) diverges as y -> 0+, got y={y}")

    def f(x: float) -> float:
        return p * moment_sums(x, params, p, acc).phi1 - y

    # p*phi1(x) <= p*upsilon*e^(x - q/2), so f(ln(y/(p*upsilon))) <= 0
    lo = math.log(y / (p * params.upsilon))
    flo = f(lo)
    step = 1.0
    while flo > 0.0:
        lo -= step
        step *= 2.0
        if step > 1e9:
            raise NoConvergenceError("no-convergence", "lower bracket for x(y) not found")
        flo = f(lo)
    hi = lo
    fhi = flo
    gap = 1.0
    for _ in range(200):
        hi = hi + gap
        gap *= 2.0
        fhi = f(hi)
        if fhi > 0.0:
            break
    else:
        raise NoConvergenceError("no-convergence", "upper bracket for x(y) not found")

    x = brentq(f, lo if flo < 0 else lo - 1e-12, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    resid = abs(f(x))
    if resid > ROOT_TOL * max(1.0, y):
        for _ in range(4):
            ms = moment_sums(x, params, p, acc)
            slope = p * ms.phi2
            if slope <= 0.0:
                break
            x -= (p * ms.phi1 - y) / slope
            resid = abs(f(x))
            if resid <= ROOT_TOL * max(1.0, y):
                break
        if resid > ROOT_TOL * max(1.0, y):
            raise NoConvergenceError("no-convergence", f"x(y) residual {resid:g} above tolerance")
    return x


def mu_bar(y: float, p: float, params: ModelParams,
           acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Chemical potential on the stationary curve: mu_bar(y) = x_of_y(y) - y."""
    return x_of_y(y, p, params, acc) - float(y)


def _g_slope_bound(p: float, q: float) -> float:
    # |g'| = |1 - p*phi2| <= max(1, p*sup phi2 - 1); 1.02 covers the
    # sub-percent gap between hump heights and their tail limit
    return max(1.0, 1.02 * p * tail_variance_limit(q) - 1.0)


def _escape_margin(p: float, q: float) -> float:
    # once g exceeds this, no future dip of g can reach zero again:
    # 1.6x the dilute-window drop estimate plus 1.2 periods of the
    # worst-case tail drop per occupancy window
    drop = 0.0
    if p > 4.0:
        s = math.sqrt(1.0 - 4.0 / p)
        drop = p * s - 4.0 * math.atanh(s)
    shoulder = max(0.0, 1.02 * p * tail_variance_limit(q) - 1.0)
    return 0.4 + 1.6 * drop + 1.2 * q * shoulder


def stationary_points(pt: ThermoPoint, params: ModelParams,
                      acc: SeriesAccuracy = DEFAULT_ACCURACY) -> tuple:
    """All stationary points of E(., p, mu), in increasing y order.

    Generic counts are 1 or 3 (more when mu sits inside a higher-occupancy
    window); kinds alternate maximum/minimum.  For upsilon = 0 the single
    boundary point y = 0 is returned.
    """
    p = _check_positive_p(pt.p)
    if params.upsilon == 0.0:
        return (StationaryPoint(x=pt.mu, y=0.0, e_value=0.0, curvature=-1.0 / p,
                                kind="maximum", boundary=True),)
    q = params.a * p

    def g(x: float) -> float:
        return x - p * moment_sums(x, params, p, acc).phi1 - pt.mu

    rate = _g_slope_bound(p, q)
    margin = _escape_margin(p, q)
    h_min, h_max = 0.02, max(4.0, q)

    roots: list[float] = []

    def add_root(xr: float) -> None:
        if not roots or abs(xr - roots[-1]) > 1e-9 * (1.0 + abs(xr)):
            roots.append(xr)

    def refine_extremum(a: float, b: float, seek_min: bool) -> None:
        # tangency candidate: g has an interior extremum near zero in [a, b]
        sign = 1.0 if seek_min else -1.0
        res = minimize_scalar(lambda t: sign * g(t), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-11})
        gm = sign * res.fun
        xm = res.x
        if seek_min:
            if gm <= 0.0:
                # actually dips through zero: two roots around xm
                if g(a) > 0.0 and gm < 0.0:
                    add_root(brentq(g, a, xm, xtol=1e-13, maxiter=200))
                    add_root(brentq(g, xm, b, xtol=1e-13, maxiter=200))
                else:
                    add_root(xm)
            elif gm <= TANGENT_TOL:
                add_root(xm)
        else:
            if gm >= 0.0:
                if g(a) < 0.0 and gm > 0.0:
                    add_root(brentq(g, a, xm, xtol=1e-13, maxiter=200))
                    add_root(brentq(g, xm, b, xtol=1e-13, maxiter=200))
                else:
                    add_root(xm)
            elif gm >= -TANGENT_TOL:
                add_root(xm)

    x_prev = pt.mu
    g_prev = g(x_prev)
    if g_prev == 0.0:
        add_root(x_prev)
    # walk history for extremum detection: (x, g) of last two steps
    hist_x = [x_prev]
    hist_g = [g_prev]
    found_since = 0.0
    for _ in range(500000):
        h = min(h_max, max(h_min, 0.45 * abs(g_prev) / rate))
        x_next = x_prev + h
        g_next = g(x_next)
        if (g_prev < 0.0 < g_next) or (g_prev > 0.0 > g_next):
            add_root(brentq(g, x_prev, x_next, xtol=1e-13, maxiter=200))
        elif g_next == 0.0:
            add_root(x_next)
        elif len(hist_g) >= 2:
            g2, g1 = hist_g[-2], hist_g[-1]
            # shallow interior extremum of g that may graze zero
            if g2 > g1 < g_next and 0.0 < g1 <= min(0.25, 50.0 * TANGENT_TOL + 0.1 * h_min * rate):
                refine_extremum(hist_x[-2], x_next, seek_min=True)
            elif g2 < g1 > g_next and 0.0 > g1 >= -min(0.25, 50.0 * TANGENT_TOL + 0.1 * h_min * rate):
                refine_extremum(hist_x[-2], x_next, seek_min=False)
        hist_x.append(x_next)
        hist_g.append(g_next)
        if len(hist_x) > 3:
            hist_x.pop(0)
            hist_g.pop(0)
        x_prev, g_prev = x_next, g_next
        if g_prev > margin:
            break
    else:
        raise NoConvergenceError("no-convergence", "stationary scan did not terminate")

    if not roots:
        raise NoConvergenceError("no-convergence", "stationary scan found no root")

    points = []
    for xr in sorted(roots):
        ms = moment_sums(xr, params, p, acc)
        y = xr - pt.mu
        e_val = -0.5 * y * y / p + ms.phi
        curv = -1.0 / p + ms.phi2
        if curv < -KIND_TOL:
            kind = "maximum"
        elif curv > KIND_TOL:
            kind = "minimum"
        else:
            kind = "degenerate"
        points.append(StationaryPoint(x=xr, y=y, e_value=e_val, curvature=curv, kind=kind))

    # alternation sanity: consecutive non-degenerate kinds must differ
    kinds = [pt_.kind for pt_ in points if pt_.kind != "degenerate"]
    for k1, k2 in zip(kinds, kinds[1:]):
        if k1 == k2:
            raise NoConvergenceError("no-convergence",
                                     "stationary scan produced non-alternating kinds")
    return tuple(points)


def _first_hump(p: float, params: ModelParams, acc: SeriesAccuracy):
    """Location and height of the first local maximum of x -> p*phi2(x, p).

    This is the dilute (occupancy 0 <-> 1) hump; further humps at higher
    occupancy are handled separately via tail_variance_limit.  For small
    a*p the humps flatten below double precision and the curve becomes
    numerically monotone toward its tail limit; the scan supremum is
    returned then.  That limit stays below 1 wherever flattening occurs,
    so callers that branch on "height > 1" are unaffected.
    """
    q = params.a * p
    ln_ups = params.ln_upsilon

    def v(x: float) -> float:
        return p * moment_sums(x, params, p, acc).phi2

    lo = min(0.0, 0.5 * q - ln_ups) - 10.0
    hi = max(q - ln_ups + 4.0, lo + 5.0)
    if q * params.upsilon < math.exp(1.0):
        # small-damping regime: the broad continuum hump sits near 1 - ln(q*upsilon)
        hi = max(hi, 1.0 - math.log(q * params.upsilon) + 6.0)

    step = 0.25
    best_x, best_v = lo, -math.inf
    for _ in range(3):
        x = lo
        v_prev2 = v(x)
        v_prev1 = v(x + step)
        for xs, vs in ((lo, v_prev2), (lo + step, v_prev1)):
            if vs > best_v:
                best_x, best_v = xs, vs
        x += 2 * step
        while x <= hi:
            v_cur = v(x)
            if v_cur > best_v:
                best_x, best_v = x, v_cur
            if v_prev1 > v_prev2 and v_prev1 > v_cur:
                res = minimize_scalar(lambda t: -v(t), bounds=(x - 2 * step, x),
                                      method="bounded", options={"xatol": 1e-11})
                return float(res.x), float(-res.fun)
            v_prev2, v_prev1 = v_prev1, v_cur
            x += step
        lo, hi = hi - 2 * step, hi + (hi - lo)  # rising at the edge: extend
    return best_x, best_v


@lru_cache(maxsize=512)
def _spinodal_cached(p: float, a: float, upsilon: float, rel_tol: float,
                     min_terms: int, max_terms: int) -> Optional[SpinodalInterval]:
    params = ModelParams(a=a, upsilon=upsilon)
    acc = SeriesAccuracy(rel_tol=rel_tol, min_terms=min_terms, max_terms=max_terms)
    if upsilon == 0.0:
        return None
    q = a * p
    x_m, v_max = _first_hump(p, params, acc)
    if v_max <= 1.0:
        return None

    def f(x: float) -> float:
        return p * moment_sums(x, params, p, acc).phi2 - 1.0

    # left crossing: f < 0 somewhere below the hump since phi2 -> 0
    xa = x_m
    step = 0.5
    while f(xa) >= 0.0:
        xa -= step
        step *= 1.5
        if xa < x_m - 3.0 * q - 60.0:
            raise NoConvergenceError("no-convergence", "left spinodal bracket not found")
    x_lo = brentq(f, xa, x_m, xtol=1e-13, maxiter=200)

    # right crossing: the first inter-occupancy dip always descends below 1
    xb = x_m
    step = 0.5
    while f(xb) >= 0.0:
        xb += step
        if xb > x_m + 2.0 * q + 20.0:
            raise NoConvergenceError("no-convergence", "right spinodal bracket not found")
    x_hi = brentq(f, x_m, xb, xtol=1e-13, maxiter=200)

    y_lo = p * moment_sums(x_lo, params, p, acc).phi1
    y_hi = p * moment_sums(x_hi, params, p, acc).phi1
    return SpinodalInterval(
        x_lo=x_lo, x_hi=x_hi, y_lo=y_lo, y_hi=y_hi,
        mu_top=x_lo - y_lo, mu_bottom=x_hi - y_hi,
        multi_well=p * tail_variance_limit(q) > 1.0)


def spinodal(p: float, params: ModelParams,
             acc: SeriesAccuracy = DEFAULT_ACCURACY) -> Optional[SpinodalInterval]:
    """First spinodal interval at coupling p, or None when E2 < 0 everywhere.

    The interval collapses to the critical point as p decreases to p_c.
    """
    p = _check_positive_p(p)
    return _spinodal_cached(p, params.a, params.upsilon,
                            acc.rel_tol, acc.min_terms, acc.max_terms)


def small_p_bound(x0: float, params: ModelParams) -> float:
    """Coupling threshold below which the whole line is single-phase.

    p01(x0) = exp(-x0 - 2*upsilon*e^(x0)) / (a*upsilon); for p <= p01 the
    supremum of p*phi2 stays below 1/a < 1.
    """
    x0 = float(x0)
    if not math.isfinite(x0):
        raise InvalidParamsError("invalid-params", f"x0 must be finite, got {x0!r}")
    if params.upsilon <= 0.0:
        raise InvalidParamsError("invalid-params", "small_p_bound needs upsilon > 0")
    return math.exp(-x0 - 2.0 * params.upsilon * math.exp(x0)) / (params.a * params.upsilon)
