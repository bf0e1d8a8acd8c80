"""Observables: pressure, density, occupation law, isotherms."""

import math

import numpy as np
import pytest

from cwphase import (
    InvalidParamsError,
    ModelParams,
    PreconditionError,
    ThermoPoint,
    classify,
    coexistence_mu,
    critical_point,
    density,
    isotherm,
    mu_bar,
    occupation_distribution,
    pressure,
    spinodal,
)


def test_pressure_and_density_single_phase(params, acc):
    pt = ThermoPoint(p=2.0, mu=-1.0)
    assert pressure(pt, params, acc) == pytest.approx(0.158765046104, abs=1e-11)
    assert density(pt, params, acc) == pytest.approx(3.5319081453 / 2.0, abs=1e-10)


def test_density_undefined_at_coexistence(params, acc):
    mu_c = coexistence_mu(6.0, params, acc).mu_c
    with pytest.raises(PreconditionError) as err:
        density(ThermoPoint(p=6.0, mu=mu_c), params, acc)
    assert err.value.code == "not-single-phase"
    # pressure is continuous across the transition and stays defined
    p_at = pressure(ThermoPoint(p=6.0, mu=mu_c), params, acc)
    assert p_at == pytest.approx(0.0048303407, abs=1e-9)


def test_density_defined_at_the_critical_point(params, acc):
    crit = critical_point(params, acc)
    pt = ThermoPoint(p=crit.p_c, mu=crit.x_c - crit.y_c)
    assert classify(pt, params, acc).status == "degenerate_critical"
    assert density(pt, params, acc) == pytest.approx(crit.n_c, abs=1e-4)


@pytest.mark.parametrize("p,mu", [(0.7, -2.5), (2.0, -1.0), (3.0, 0.5)])
def test_occupation_distribution_identities(params, acc, p, mu):
    pt = ThermoPoint(p=p, mu=mu)
    dist = occupation_distribution(pt, params, acc)
    probs = dist.probs
    assert probs.min() >= 0.0
    assert probs.sum() == pytest.approx(1.0, abs=1e-13)
    mean = float(np.arange(len(probs)) @ probs)
    assert dist.mean == pytest.approx(mean, rel=1e-14)
    assert dist.mean == pytest.approx(dist.y_bar / p, rel=1e-10)
    assert dist.truncation_mass <= 1e-12


def test_occupation_branches_at_coexistence(params, acc):
    res = coexistence_mu(6.0, params, acc)
    pt = ThermoPoint(p=6.0, mu=res.mu_c)
    with pytest.raises(PreconditionError) as err:
        occupation_distribution(pt, params, acc)
    assert err.value.code == "branch-required"
    low = occupation_distribution(pt, params, acc, branch_choice="low")
    high = occupation_distribution(pt, params, acc, branch_choice="high")
    assert low.mean == pytest.approx(res.y_low / 6.0, rel=1e-9)
    assert high.mean == pytest.approx(res.y_high / 6.0, rel=1e-9)
    assert low.mean < high.mean


def test_occupation_branch_choice_validation(params, acc):
    with pytest.raises(InvalidParamsError):
        occupation_distribution(ThermoPoint(p=2.0, mu=-1.0), params, acc,
                                branch_choice="upper")


def test_occupation_n_max_pads_and_truncates(params, acc):
    pt = ThermoPoint(p=2.0, mu=-1.0)
    full = occupation_distribution(pt, params, acc)
    padded = occupation_distribution(pt, params, acc, n_max=len(full.probs) + 19)
    assert len(padded.probs) == len(full.probs) + 20
    assert np.all(padded.probs[len(full.probs):] == 0.0)
    cut = occupation_distribution(pt, params, acc, n_max=2)
    assert len(cut.probs) == 3
    assert cut.probs.sum() == pytest.approx(1.0, abs=1e-14)
    assert cut.truncation_mass > 1e-3
    # renormalized head keeps the original ratios
    assert cut.probs[1] / cut.probs[0] == pytest.approx(
        full.probs[1] / full.probs[0], rel=1e-12)


def test_empty_cells_distribution(acc):
    dist = occupation_distribution(ThermoPoint(p=2.0, mu=0.5),
                                   ModelParams(upsilon=0.0), acc)
    assert dist.probs[0] == 1.0
    assert dist.mean == 0.0


def test_isotherm_branch_labels(params, acc):
    win = spinodal(6.0, params, acc)
    coex = coexistence_mu(6.0, params, acc)
    ys = np.linspace(0.25, 6.2, 120)
    rows = isotherm(6.0, params, ys, acc=acc)
    assert [r.y for r in rows] == pytest.approx(list(ys))
    for r in rows:
        assert r.n == pytest.approx(r.y / 6.0, rel=1e-14)
        assert r.mu == pytest.approx(mu_bar(r.y, 6.0, params, acc), abs=1e-12)
        if win.y_lo < r.y < win.y_hi:
            assert r.branch == "unstable"
        elif coex.y_low <= r.y <= win.y_lo or win.y_hi <= r.y <= coex.y_high:
            assert r.branch == "metastable"
        else:
            assert r.branch == "stable"
    assert {r.branch for r in rows} == {"stable", "metastable", "unstable"}


def test_isotherm_maxwell_flattens_the_loop(params, acc):
    coex = coexistence_mu(6.0, params, acc)
    ys = np.linspace(0.25, 6.2, 80)
    plain = isotherm(6.0, params, ys, acc=acc)
    flat = isotherm(6.0, params, ys, maxwell=True, acc=acc)
    for r0, r1 in zip(plain, flat):
        assert r0.branch == r1.branch
        if coex.y_low < r0.y < coex.y_high:
            assert r1.mu == pytest.approx(coex.mu_c, abs=1e-12)
            assert r1.pressure == pytest.approx(coex.pressure, abs=1e-12)
        else:
            assert r1.mu == r0.mu
            assert r1.pressure == r0.pressure
    # tie line: monotone mu across the flattened stretch
    mus = [r.mu for r in flat]
    assert all(m2 - m1 >= -1e-12 for m1, m2 in zip(mus, mus[1:]))


def test_isotherm_below_critical_is_all_stable(params, acc):
    ys = np.linspace(0.5, 5.0, 40)
    rows = isotherm(2.0, params, ys, acc=acc)
    assert all(r.branch == "stable" for r in rows)
    flat = isotherm(2.0, params, ys, maxwell=True, acc=acc)
    assert rows == flat


def test_isotherm_validation(params, acc):
    with pytest.raises(InvalidParamsError):
        isotherm(0.0, params, np.array([1.0, 2.0]), acc=acc)
    with pytest.raises(InvalidParamsError):
        isotherm(2.0, ModelParams(upsilon=0.0), np.array([1.0]), acc=acc)
