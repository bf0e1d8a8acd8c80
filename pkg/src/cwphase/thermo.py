"""Observable thermodynamics: pressure, density, per-cell occupation law
and isotherms with optional Maxwell construction.

P = E(y_max)/upsilon at the global maximum y_max; n_bar = y_max/p; the
occupation law of a pure phase is Q(n) proportional to the cell weight at
the branch field x = y_max + mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import InvalidParamsError, PreconditionError
from .params import DEFAULT_ACCURACY, ModelParams, SeriesAccuracy, ThermoPoint
from .phase import classify, coexistence_mu
from .series import moment_sums
from .stationary import spinodal, x_of_y

_TAIL_RATIO_CAP = 0.9


@dataclass(frozen=True, eq=False)
class OccupationDistribution:
    """Normalized cell-occupation probabilities Q(0..n_max) of one branch.

    truncation_mass bounds the probability mass dropped past the last
    entry (geometric tail estimate); mean is the first moment of probs.
    """

    probs: np.ndarray
    y_bar: float
    mean: float
    truncation_mass: float


@dataclass(frozen=True)
class IsothermPoint:
    """One point of the y-parametrized isotherm.

    branch is "unstable" strictly inside the spinodal y-interval,
    "metastable" between a coexistence density and its spinodal edge,
    "stable" elsewhere.
    """

    y: float
    n: float
    mu: float
    pressure: float
    branch: str


def pressure(pt: ThermoPoint, params: ModelParams,
             acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """P(p, mu) = E(global max)/upsilon; at coexistence both maxima agree."""
    if params.upsilon <= 0.0:
        raise InvalidParamsError("invalid-params", "pressure needs upsilon > 0")
    c = classify(pt, params, acc)
    return c.global_max.e_value / params.upsilon


def density(pt: ThermoPoint, params: ModelParams,
            acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Mean cell occupation n_bar = y_max/p of the unique phase.

    Precondition: not a coexistence candidate (the two tied phases have
    different densities).
    """
    c = classify(pt, params, acc)
    if c.status == "coexistence_candidate":
        raise PreconditionError("not-single-phase",
                                f"density is two-valued at coexistence (p={pt.p}, mu={pt.mu})")
    return c.global_max.y / pt.p


def _branch_distribution(x: float, pt: ThermoPoint, params: ModelParams,
                         acc: SeriesAccuracy, n_max):
    """Weights of Q at branch field x, extended until the geometric tail
    estimate drops below acc.rel_tol/4 of the total."""
    if params.upsilon == 0.0:
        probs = np.zeros((n_max or 0) + 1)
        probs[0] = 1.0
        return probs, 0.0
    q = params.a * pt.p
    t = params.ln_upsilon + x
    ms = moment_sums(x, params, pt.p, acc)
    n_cut = max(ms.n_terms, 2)

    def log_w(n_arr):
        return t * n_arr - gammaln(n_arr + 1.0) - 0.5 * q * n_arr * n_arr

    L = log_w(np.arange(n_cut, dtype=np.float64))
    for _ in range(64):
        w = np.exp(L - L.max())
        total = w.sum()
        ratio = w[-1] / w[-2] if w[-2] > 0.0 else 0.0
        drop = w[-1] * ratio / (1.0 - ratio) if ratio < 1.0 else np.inf
        if ratio < _TAIL_RATIO_CAP and drop <= 0.25 * acc.rel_tol * total:
            break
        ext = log_w(np.arange(L.size, L.size + 64, dtype=np.float64))
        L = np.concatenate([L, ext])
        if L.size > acc.max_terms:
            break
    w = np.exp(L - L.max())
    total = w.sum()
    ratio = w[-1] / w[-2] if w[-2] > 0.0 else 0.0
    drop = w[-1] * ratio / (1.0 - ratio) if ratio < 1.0 else np.inf
    probs = w / total
    trunc = float(drop / total)

    if n_max is not None:
        want = int(n_max) + 1
        if want < probs.size:
            cut_mass = float(probs[want:].sum())
            probs = probs[:want]
            probs = probs / probs.sum()
            trunc = max(trunc, cut_mass)
        elif want > probs.size:
            probs = np.concatenate([probs, np.zeros(want - probs.size)])
    return probs, trunc


def occupation_distribution(pt: ThermoPoint, params: ModelParams,
                            acc: SeriesAccuracy = DEFAULT_ACCURACY,
                            branch_choice: str | None = None,
                            n_max: int | None = None) -> OccupationDistribution:
    """Occupation law Q of the selected phase at (p, mu).

    branch_choice "low"/"high" picks the smaller/larger-y maximum; it is
    required at a coexistence candidate and optional elsewhere.
    """
    if branch_choice not in (None, "low", "high"):
        raise InvalidParamsError("invalid-params",
                                 f"branch_choice must be low or high, got {branch_choice!r}")
    c = classify(pt, params, acc)
    maxima = sorted((s for s in c.all_points if s.kind in ("maximum", "degenerate")),
                    key=lambda s: s.y)
    if branch_choice is None:
        if c.status == "coexistence_candidate":
            raise PreconditionError("branch-required",
                                    "two tied phases here; pass branch_choice low or high")
        target = c.global_max
    else:
        target = maxima[0] if branch_choice == "low" else maxima[-1]
    probs, trunc = _branch_distribution(target.x, pt, params, acc, n_max)
    mean = float(np.dot(np.arange(probs.size, dtype=np.float64), probs))
    return OccupationDistribution(probs=probs, y_bar=target.y, mean=mean,
                                  truncation_mass=trunc)


def isotherm(p: float, params: ModelParams, y_grid, maxwell: bool = False,
             acc: SeriesAccuracy = DEFAULT_ACCURACY) -> list:
    """The isotherm at coupling p over the given y grid.

    Each point carries its own mu = mu_bar(y) and branch pressure
    P = E(y)/upsilon.  With maxwell=True and a nonempty spinodal, points
    with y strictly between the coexistence densities get the flat
    tie-line values (mu_c, P_c) instead; branch labels are unchanged.
    Below the critical coupling maxwell is a no-op.
    """
    p = float(p)
    if not (math.isfinite(p) and p > 0.0):
        raise InvalidParamsError("invalid-params", f"isotherm needs p > 0, got {p!r}")
    if params.upsilon <= 0.0:
        raise InvalidParamsError("invalid-params", "isotherm needs upsilon > 0")
    win = spinodal(p, params, acc)
    coex = coexistence_mu(p, params, acc) if win is not None else None

    out = []
    for y in y_grid:
        y = float(y)
        x = x_of_y(y, p, params, acc)
        mu = x - y
        ms = moment_sums(x, params, p, acc)
        e_val = -0.5 * y * y / p + ms.phi
        press = e_val / params.upsilon
        if win is not None and win.y_lo < y < win.y_hi:
            branch = "unstable"
        elif coex is not None and (coex.y_low <= y <= win.y_lo or win.y_hi <= y <= coex.y_high):
            branch = "metastable"
        else:
            branch = "stable"
        if maxwell and coex is not None and coex.y_low < y < coex.y_high:
            mu = coex.mu_c
            press = coex.pressure
        out.append(IsothermPoint(y=y, n=y / p, mu=mu, pressure=press, branch=branch))
    return out
