"""Command-line interface.

Scalar results are emitted as flat JSON, curves as CSV (override with
--format).  All numbers go through one %g formatter at the requested
--precision, so reruns are byte-identical.  Errors print a JSON object
{"error": code, "message": ...} on stderr; exit codes: 2 invalid
arguments/domain, 3 solver non-convergence, 4 precondition violation.
CW_PHASE_THREADS caps worker threads for grid commands.
"""

from __future__ import annotations

import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import oracle, phase, stationary, thermo
from .errors import CwPhaseError
from .params import ModelParams, SeriesAccuracy, ThermoPoint
from .series import big_e


def _fmt(value, prec: int, json_mode: bool) -> str:
    if value is None:
        return "null" if json_mode else ""
    if isinstance(value, str):
        return json.dumps(value) if json_mode else value
    if isinstance(value, (bool, np.bool_)):
        return ("true" if value else "false") if json_mode else str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "null" if json_mode else "nan"
    if math.isinf(v):
        if json_mode:
            return "null"
        return "inf" if v > 0 else "-inf"
    if v == 0.0:
        v = 0.0  # normalize -0.0
    return f"{v:.{prec}g}"


def _record_text(fields, prec: int, fmt: str) -> str:
    # fields: list of (name, value) or (name, list-of-(name, value)) one level deep
    if fmt == "json":
        parts = []
        for name, value in fields:
            if isinstance(value, list) and value and isinstance(value[0], tuple):
                inner = ", ".join(f'"{k}": {_fmt(v, prec, True)}' for k, v in value)
                parts.append(f'"{name}": {{{inner}}}')
            elif isinstance(value, list):
                inner = ", ".join(_fmt(v, prec, True) for v in value)
                parts.append(f'"{name}": [{inner}]')
            else:
                parts.append(f'"{name}": {_fmt(value, prec, True)}')
        return "{" + ", ".join(parts) + "}\n"
    # CSV: flatten one level
    names, values = [], []
    for name, value in fields:
        if isinstance(value, list) and value and isinstance(value[0], tuple):
            for k, v in value:
                names.append(f"{name}_{k}")
                values.append(v)
        elif isinstance(value, list):
            for i, v in enumerate(value):
                names.append(f"{name}_{i}")
                values.append(v)
        else:
            names.append(name)
            values.append(value)
    return (",".join(names) + "\n"
            + ",".join(_fmt(v, prec, False) for v in values) + "\n")


def _table_text(columns, rows, prec: int, fmt: str) -> str:
    if fmt == "json":
        cols = ", ".join(json.dumps(c) for c in columns)
        row_texts = []
        for row in rows:
            row_texts.append("[" + ", ".join(_fmt(v, prec, True) for v in row) + "]")
        return f'{{"columns": [{cols}], "rows": [' + ", ".join(row_texts) + "]}\n"
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v, prec, False) for v in row))
    return "\n".join(lines) + "\n"


def _emit(ctx: click.Context, text: str) -> None:
    out = ctx.obj["output"]
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _n_threads() -> int:
    raw = os.environ.get("CW_PHASE_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _map_ordered(fn, items):
    workers = _n_threads()
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if not (hi > lo):
        raise click.UsageError(f"grid needs max > min, got [{lo}, {hi}]")
    return np.linspace(lo, hi, steps)


@click.group()
@click.option("--a", type=float, default=1.2, show_default=True,
              help="Repulsion ratio a > 1.")
@click.option("--upsilon", type=float, default=12.0, show_default=True,
              help="Cell volume.")
@click.option("--rel-tol", type=float, default=1e-15, show_default=True,
              help="Series truncation tolerance.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
              help="Output format (default: json for scalar commands, csv for curves).")
@click.option("--output", type=str, default="-", show_default=True,
              help="Output file, or - for stdout.")
@click.option("--precision", type=click.IntRange(6, 17), default=12, show_default=True,
              help="Significant digits in emitted numbers.")
@click.pass_context
def cli(ctx, a, upsilon, rel_tol, fmt, output, precision):
    """Phase structure of the mean-field cell gas."""
    ctx.ensure_object(dict)
    ctx.obj["params"] = ModelParams(a=a, upsilon=upsilon)
    ctx.obj["acc"] = SeriesAccuracy(rel_tol=rel_tol)
    ctx.obj["fmt"] = fmt
    ctx.obj["output"] = output
    ctx.obj["prec"] = precision


def _fmt_of(ctx, default: str) -> str:
    return ctx.obj["fmt"] or default


@cli.command()
@click.pass_context
def critical(ctx):
    """Critical point (p_c, x_c, y_c, n_c)."""
    res = phase.critical_point(ctx.obj["params"], ctx.obj["acc"])
    fields = [("p_c", res.p_c), ("x_c", res.x_c), ("y_c", res.y_c), ("n_c", res.n_c)]
    _emit(ctx, _record_text(fields, ctx.obj["prec"], _fmt_of(ctx, "json")))


@cli.command()
@click.option("--p", type=float, required=True, help="Coupling p.")
@click.pass_context
def coexist(ctx, p):
    """Coexistence point at coupling p."""
    res = phase.coexistence_mu(p, ctx.obj["params"], ctx.obj["acc"])
    fields = [
        ("mu_c", res.mu_c),
        ("y_low", res.y_low),
        ("y_high", res.y_high),
        ("pressure", res.pressure),
        ("mu_window", [res.window.mu_bottom, res.window.mu_top]),
    ]
    _emit(ctx, _record_text(fields, ctx.obj["prec"], _fmt_of(ctx, "json")))


@cli.command()
@click.option("--p", type=float, required=True)
@click.option("--mu", type=float, required=True)
@click.pass_context
def classify(ctx, p, mu):
    """Phase classification at (p, mu)."""
    res = phase.classify(ThermoPoint(p=p, mu=mu), ctx.obj["params"], ctx.obj["acc"])
    g = res.global_max
    fields = [
        ("status", res.status),
        ("gap", None if math.isinf(res.gap) else res.gap),
        ("global_max", [("x", g.x), ("y", g.y), ("e_value", g.e_value),
                        ("curvature", g.curvature), ("kind", g.kind)]),
        ("n_stationary", len(res.all_points)),
    ]
    _emit(ctx, _record_text(fields, ctx.obj["prec"], _fmt_of(ctx, "json")))


@cli.command("mu-curve")
@click.option("--p", type=float, required=True)
@click.option("--y-min", type=float, required=True)
@click.option("--y-max", type=float, required=True)
@click.option("--steps", type=click.IntRange(min=2), default=200, show_default=True)
@click.pass_context
def mu_curve(ctx, p, y_min, y_max, steps):
    """mu_bar(y) along the stationary curve."""
    params, acc = ctx.obj["params"], ctx.obj["acc"]
    ys = _grid(y_min, y_max, steps)
    rows = _map_ordered(lambda y: (y, stationary.mu_bar(y, p, params, acc)), ys)
    _emit(ctx, _table_text(["y", "mu_bar"], rows, ctx.obj["prec"], _fmt_of(ctx, "csv")))


@cli.command()
@click.option("--p", type=float, required=True)
@click.option("--mu", type=float, required=True)
@click.option("--y-min", type=float, required=True)
@click.option("--y-max", type=float, required=True)
@click.option("--steps", type=click.IntRange(min=2), default=200, show_default=True)
@click.pass_context
def energy(ctx, p, mu, y_min, y_max, steps):
    """Landscape E(y) at fixed (p, mu)."""
    params, acc = ctx.obj["params"], ctx.obj["acc"]
    pt = ThermoPoint(p=p, mu=mu)
    ys = _grid(y_min, y_max, steps)
    rows = _map_ordered(lambda y: (y, big_e(y, pt, params, acc)), ys)
    _emit(ctx, _table_text(["y", "E"], rows, ctx.obj["prec"], _fmt_of(ctx, "csv")))


@cli.command("branch-energies")
@click.option("--p", type=float, required=True)
@click.option("--mu-min", type=float, required=True)
@click.option("--mu-max", type=float, required=True)
@click.option("--steps", type=click.IntRange(min=2), default=100, show_default=True)
@click.pass_context
def branch_energies_cmd(ctx, p, mu_min, mu_max, steps):
    """E on the low and high branches across the metastable window."""
    params, acc = ctx.obj["params"], ctx.obj["acc"]
    mus = _grid(mu_min, mu_max, steps)

    def row(mu):
        e_low, e_high = phase.branch_energies(p, mu, params, acc)
        return (mu, e_low, e_high)

    rows = _map_ordered(row, mus)
    _emit(ctx, _table_text(["mu", "E_low", "E_high"], rows, ctx.obj["prec"],
                           _fmt_of(ctx, "csv")))


@cli.command()
@click.option("--p", type=float, required=True)
@click.option("--y-min", type=float, required=True)
@click.option("--y-max", type=float, required=True)
@click.option("--steps", type=click.IntRange(min=2), default=200, show_default=True)
@click.option("--maxwell", is_flag=True, default=False,
              help="Flatten the coexistence region to the tie line.")
@click.pass_context
def isotherm(ctx, p, y_min, y_max, steps, maxwell):
    """Isotherm rows (y, n, mu, pressure, branch)."""
    params, acc = ctx.obj["params"], ctx.obj["acc"]
    ys = _grid(y_min, y_max, steps)
    pts = thermo.isotherm(p, params, ys, maxwell=maxwell, acc=acc)
    rows = [(q.y, q.n, q.mu, q.pressure, q.branch) for q in pts]
    _emit(ctx, _table_text(["y", "n", "mu", "pressure", "branch"], rows,
                           ctx.obj["prec"], _fmt_of(ctx, "csv")))


@cli.command()
@click.option("--p", type=float, required=True)
@click.option("--mu", type=float, required=True)
@click.option("--branch", type=click.Choice(["low", "high"]), default=None,
              help="Phase branch when two maxima coexist.")
@click.option("--n-max", type=click.IntRange(min=0), default=None,
              help="Highest occupation number to emit.")
@click.pass_context
def distribution(ctx, p, mu, branch, n_max):
    """Cell occupation law Q(n) of one phase."""
    params, acc = ctx.obj["params"], ctx.obj["acc"]
    dist = thermo.occupation_distribution(ThermoPoint(p=p, mu=mu), params, acc,
                                          branch_choice=branch, n_max=n_max)
    rows = [(n, float(qn)) for n, qn in enumerate(dist.probs)]
    _emit(ctx, _table_text(["n", "Q"], rows, ctx.obj["prec"], _fmt_of(ctx, "csv")))


@cli.command()
@click.option("--p", type=float, required=True)
@click.option("--mu", type=float, required=True)
@click.option("--n-list", type=str, required=True,
              help="Comma-separated cell counts, e.g. 2,4,8,16.")
@click.pass_context
def validate(ctx, p, mu, n_list):
    """Finite-N pressure convergence report."""
    try:
        ns = [int(tok) for tok in n_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise click.UsageError(f"bad --n-list {n_list!r}: {exc}") from None
    params, acc = ctx.obj["params"], ctx.obj["acc"]
    rows = oracle.convergence_report(ThermoPoint(p=p, mu=mu), params, ns, acc)
    table = [(r.n_cells, r.p_n, r.p_limit, r.gap) for r in rows]
    _emit(ctx, _table_text(["N", "P_N", "P_limit", "gap"], table,
                           ctx.obj["prec"], _fmt_of(ctx, "csv")))


def main(argv=None):
    """Entry point: route library errors to stderr JSON + typed exit codes."""
    try:
        cli(args=argv, standalone_mode=True, prog_name="cwphase")
    except CwPhaseError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": exc.message}) + "\n")
        sys.exit(exc.exit_code)


if __name__ == "__main__":
    main()
