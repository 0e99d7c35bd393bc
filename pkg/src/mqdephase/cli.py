"""Command-line interface.

Subcommands: counts, simulate, model, rates, scaling, fit.  Outputs are CSV
(or JSON for fits) with full round-trip float precision, and any run is
byte-reproducible.  Every option may also be supplied through a JSON config
file (``--config``); an explicit flag wins over the config file, which wins
over the built-in default.  Usage problems exit with status 2, domain errors
from the library with status 1.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np
from click.core import ParameterSource

from . import combinatorics, couplings, exact, fitting, rates
from .errors import MqdephaseError
from .model import ModelParams, s_m_composite, s_total

__all__ = ["main"]


def _fmt(x) -> str:
    """Shortest representation that parses back to the same value."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _csv_text(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _apply_config(ctx: click.Context, config: str | None, params: dict) -> dict:
    """Fill parameters from a JSON config file; explicit flags take precedence."""
    if config is None:
        return params
    try:
        data = json.loads(Path(config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {config}: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError(f"config {config} must be a JSON object")
    unknown = set(data) - set(params)
    if unknown:
        raise click.UsageError(f"config {config} has unknown keys: {sorted(unknown)}")
    merged = dict(params)
    for key, value in data.items():
        source = ctx.get_parameter_source(key)
        if source not in (ParameterSource.COMMANDLINE, ParameterSource.ENVIRONMENT):
            merged[key] = tuple(value) if isinstance(value, list) else value
    return merged


def _require(params: dict, *names: str) -> None:
    for name in names:
        value = params[name]
        if value is None or (isinstance(value, tuple) and not value):
            raise click.UsageError(f"missing required option --{name.replace('_', '-')}")


def _check_range(params: dict) -> None:
    if "p" in params and params["p"] is not None and not 0.0 <= params["p"] <= 1.0:
        raise click.UsageError(f"--p must lie in [0, 1], got {params['p']}")
    if "m2" in params and params["m2"] is not None and params["m2"] <= 0:
        raise click.UsageError(f"--m2 must be positive, got {params['m2']}")
    if "t_max" in params and params["t_max"] is not None and params["t_max"] <= 0:
        raise click.UsageError(f"--t-max must be positive, got {params['t_max']}")
    if "steps" in params and params["steps"] is not None and params["steps"] < 2:
        raise click.UsageError(f"--steps must be >= 2, got {params['steps']}")


def _time_grid(t_max: float, steps: int) -> np.ndarray:
    return np.linspace(0.0, float(t_max), int(steps))


def _domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MqdephaseError as exc:
            raise click.ClickException(str(exc))

    return wrapper


config_option = click.option(
    "--config", type=click.Path(exists=True, dir_okay=False), default=None,
    help="JSON file supplying defaults for any option of this command.",
)
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None,
                          help="Output path (default: stdout).")


@click.group()
@click.version_option(package_name="mqdephase")
def main():
    """Dipolar dephasing of multiple-quantum spin coherences."""


@main.command()
@click.option("--n", type=int, default=None, help="Spin count.")
@click.option("--M", "order", type=int, default=None, help="Coherence order.")
@out_option
@config_option
@click.pass_context
@_domain_errors
def counts(ctx, n, order, out, config):
    """Exact and asymptotic configuration counts per Hamming distance."""
    params = _apply_config(ctx, config, {"n": n, "order": order})
    _require(params, "n", "order")
    n, order = int(params["n"]), int(params["order"])
    rows = []
    for f in combinatorics.hamming_range(n, order):
        exact_count = combinatorics.config_count(n, order, f)
        asym = combinatorics.config_count_asymptotic(n, order, f).value if f >= 1 else float("nan")
        rows.append([n, order, f, exact_count, asym])
    _emit(_csv_text(["n", "M", "f", "exact", "asymptotic"], rows), out)


@main.command()
@click.option("--couplings", "couplings_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Coupling-set JSON file.")
@click.option("--geometry", "geometry_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Geometry file: first line n, then n lines 'x y z' in meters.")
@click.option("--gamma", type=float, default=None,
              help="Gyromagnetic ratio (rad/s/T) for --geometry.")
@click.option("--field-axis", type=str, default="0,0,1", show_default=True,
              help="Static-field direction 'x,y,z' for --geometry.")
@click.option("--units", type=click.Choice([couplings.SI, couplings.GAUSSIAN]),
              default=couplings.SI, show_default=True)
@click.option("--synth", type=click.Choice(["constant", "random"]), default=None,
              help="Synthetic coupling generator.")
@click.option("--n", type=int, default=None, help="Spin count for --synth.")
@click.option("--b", type=float, default=None, help="Coupling value (rad/s) for --synth constant.")
@click.option("--magnitude", type=float, default=None,
              help="Coupling magnitude (rad/s) for --synth random.")
@click.option("--zero-mean/--one-sided", "zero_mean", default=True, show_default=True,
              help="Random draws symmetric about zero, or positive only.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--M", "order", type=int, default=None,
              help="Coherence order; omit for the total signal.")
@click.option("--t-max", type=float, default=None, help="Last time sample (s).")
@click.option("--steps", type=int, default=101, show_default=True,
              help="Number of samples including t=0.")
@click.option("--n-cap", type=int, default=exact.DEFAULT_SIZE_CAP, show_default=True,
              help="Enumeration size cap.")
@click.option("--workers", type=int, default=None, envvar="MQDEPHASE_WORKERS",
              help="Worker threads for enumeration (env MQDEPHASE_WORKERS).")
@out_option
@config_option
@click.pass_context
@_domain_errors
def simulate(ctx, couplings_path, geometry_path, gamma, field_axis, units, synth, n, b,
             magnitude, zero_mean, seed, order, t_max, steps, n_cap, workers, out, config):
    """Exact dipolar decay signal of a small cluster (CSV: t,S)."""
    params = _apply_config(ctx, config, {
        "couplings_path": couplings_path, "geometry_path": geometry_path, "gamma": gamma,
        "field_axis": field_axis, "units": units, "synth": synth, "n": n, "b": b,
        "magnitude": magnitude, "zero_mean": zero_mean, "seed": seed, "order": order,
        "t_max": t_max, "steps": steps, "n_cap": n_cap, "workers": workers,
    })
    _check_range(params)
    _require(params, "t_max")
    sources = [params["couplings_path"], params["geometry_path"], params["synth"]]
    if sum(s is not None for s in sources) != 1:
        raise click.UsageError("choose exactly one of --couplings, --geometry, --synth")

    if params["couplings_path"] is not None:
        cset = couplings.coupling_set_from_json(Path(params["couplings_path"]).read_text())
    elif params["geometry_path"] is not None:
        _require(params, "gamma")
        try:
            axis = [float(v) for v in str(params["field_axis"]).split(",")]
        except ValueError:
            raise click.UsageError(f"--field-axis must be 'x,y,z', got {params['field_axis']!r}")
        geom = couplings.load_geometry(params["geometry_path"], field_axis=axis,
                                       gyromagnetic_ratio=params["gamma"])
        cset = couplings.dipolar_couplings(geom, units_convention=params["units"])
    else:
        _require(params, "n")
        if params["synth"] == "constant":
            _require(params, "b")
            cset = couplings.synth_constant(params["n"], params["b"])
        else:
            _require(params, "magnitude")
            cset = couplings.synth_random(params["n"], params["magnitude"],
                                          zero_mean=params["zero_mean"], seed=params["seed"])

    times = _time_grid(params["t_max"], params["steps"])
    if params["order"] is None:
        series = exact.total_signal(cset, times, size_cap=params["n_cap"],
                                    workers=params["workers"])
    else:
        series = exact.dipolar_signal(cset, params["order"], times,
                                      size_cap=params["n_cap"], workers=params["workers"])
    _emit(_csv_text(["t", "S"], [[t, v] for t, v in zip(series.times, series.values)]), out)


@main.command()
@click.option("--n", type=int, default=None, help="Cluster size.")
@click.option("--p", type=float, default=None, help="Degree of correlation in [0, 1].")
@click.option("--m2", type=float, default=None, help="Van Vleck second moment (s^-2).")
@click.option("--M", "orders", type=int, multiple=True,
              help="Coherence order(s); omit for the total signal.")
@click.option("--t-max", type=float, default=None, help="Last time sample (s).")
@click.option("--steps", type=int, default=201, show_default=True)
@out_option
@config_option
@click.pass_context
@_domain_errors
def model(ctx, n, p, m2, orders, t_max, steps, out, config):
    """Closed-form decay curves (CSV: t,S or t,S_M...)."""
    params = _apply_config(ctx, config, {"n": n, "p": p, "m2": m2, "orders": orders,
                                         "t_max": t_max, "steps": steps})
    _check_range(params)
    _require(params, "n", "p", "m2", "t_max")
    mp = ModelParams.from_second_moment(int(params["n"]), params["p"], params["m2"])
    times = _time_grid(params["t_max"], params["steps"])
    orders = tuple(int(m) for m in params["orders"])
    if not orders:
        header = ["t", "S"]
        cols = [s_total(mp, times)]
    else:
        header = ["t"] + [f"S_M{m}" for m in orders]
        cols = [s_m_composite(mp, m, times) for m in orders]
    rows = [[t, *(c[i] for c in cols)] for i, t in enumerate(times)]
    _emit(_csv_text(header, rows), out)


@main.command("rates")
@click.option("--n", type=int, default=None, help="Cluster size.")
@click.option("--p", type=float, default=None, help="Degree of correlation in [0, 1].")
@click.option("--m2", type=float, default=None, help="Van Vleck second moment (s^-2).")
@click.option("--M", "orders", type=int, multiple=True, help="Coherence order(s).")
@out_option
@config_option
@click.pass_context
@_domain_errors
def rates_cmd(ctx, n, p, m2, orders, out, config):
    """Composite-law decay rates per coherence order (CSV: M,rate; nan = no crossing)."""
    params = _apply_config(ctx, config, {"n": n, "p": p, "m2": m2, "orders": orders})
    _check_range(params)
    _require(params, "n", "p", "m2", "orders")
    mp = ModelParams.from_second_moment(int(params["n"]), params["p"], params["m2"])
    curve = rates.rate_curve(mp, [int(m) for m in params["orders"]])
    rows = [[m, r] for m, r in zip(curve.M_values, curve.rates)]
    _emit(_csv_text(["M", "rate"], rows), out)


@main.command()
@click.option("--n", "sizes", type=int, multiple=True, help="Cluster sizes (>= 3 of them).")
@click.option("--p", type=float, default=None, help="Degree of correlation in [0, 1].")
@click.option("--m2", type=float, default=None, help="Van Vleck second moment (s^-2).")
@click.option("--M", "order", type=int, default=None,
              help="Fix the coherence order; omit to use the total signal.")
@out_option
@config_option
@click.pass_context
@_domain_errors
def scaling(ctx, sizes, p, m2, order, out, config):
    """Rate versus cluster size with fitted log-log exponent (CSV: n,rate,exponent)."""
    params = _apply_config(ctx, config, {"sizes": sizes, "p": p, "m2": m2, "order": order})
    _check_range(params)
    _require(params, "sizes", "p", "m2")
    plist = [ModelParams.from_second_moment(int(n), params["p"], params["m2"])
             for n in params["sizes"]]
    curve = rates.scaling_curve(plist, order=params["order"])
    rows = [[n, r, curve.exponent] for n, r in zip(curve.n_values, curve.rates)]
    _emit(_csv_text(["n", "rate", "exponent"], rows), out)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Rate CSV with header n,M,rate_per_s,sigma_per_s.")
@click.option("--output", "output_path", type=click.Path(dir_okay=False), default=None,
              help="Output JSON path (default: stdout).")
@click.option("--pool-m2", is_flag=True, default=False,
              help="Also report the pooled second moment across cluster sizes.")
@config_option
@click.pass_context
@_domain_errors
def fit(ctx, input_path, output_path, pool_m2, config):
    """Recover (p, M2) per cluster size from rate data (JSON output)."""
    params = _apply_config(ctx, config, {"input_path": input_path,
                                         "output_path": output_path, "pool_m2": pool_m2})
    _require(params, "input_path")
    points = fitting.load_rate_csv(params["input_path"])
    by_size: dict[int, list] = {}
    for pt in points:
        by_size.setdefault(pt.n, []).append(pt)
    results = [fitting.fit_rates(by_size[n]) for n in sorted(by_size)]
    fits_json = [fitting.fit_result_to_dict(r) for r in results]
    if params["pool_m2"]:
        pooled = fitting.pool_second_moment(results)
        payload = {"fits": fits_json, "pooled_m2_per_s2": pooled.mean,
                   "pooled_m2_std_per_s2": pooled.std}
    else:
        payload = fits_json
    _emit(json.dumps(payload, indent=2) + "\n", params["output_path"])


if __name__ == "__main__":
    main()
