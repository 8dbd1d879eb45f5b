"""Command line interface.

Exit codes: 0 success, 1 verdict mismatch (reference limit missed, check
failed), 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, validate_config
from .kriging import PRECISIONS, KrigingError

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SWEEP_COLUMNS = ("scenario", "epsilon", "mse_near", "mse_full", "ratio", "condition", "precision")


def _num(x):
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.11e}"


class _Table:
    """CSV text with optional timestamp header and ``#`` footer lines."""

    def __init__(self, columns, title, timestamp):
        self.buf = io.StringIO()
        if timestamp:
            stamp = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
            self.buf.write(f"# screenlab {__version__} {title}, generated {stamp}\n")
        self.writer = csv.writer(self.buf, lineterminator="\n")
        self.writer.writerow(columns)

    def row(self, values):
        self.writer.writerow(values)

    def footer(self, key, value):
        self.buf.write(f"# {key},{value}\n")

    def emit(self, path):
        text = self.buf.getvalue()
        if path is None:
            click.echo(text, nl=False)
        else:
            Path(path).write_text(text, encoding="utf-8")


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _resolve(data, overrides) -> RunConfig:
    for k, v in overrides.items():
        if v is None or v == ():
            continue
        if k in ("csv", "plot"):
            data.setdefault("output", {})
            if not isinstance(data["output"], dict):
                raise ConfigError("output must be an object")
            data["output"][k] = v
        elif k == "fcond":
            data.setdefault("fcond", {})
            if not isinstance(data["fcond"], dict):
                raise ConfigError("fcond must be an object")
            data["fcond"].update({kk: vv for kk, vv in v.items() if vv is not None})
        else:
            data[k] = v
    env = os.environ.get("KRIGE_PRECISION")
    if env is not None and (env.strip().lower() or "auto") not in PRECISIONS:
        raise ConfigError(f"KRIGE_PRECISION must be one of {', '.join(PRECISIONS)}")
    return validate_config(data)


def _config(command, config_path, **overrides) -> RunConfig:
    try:
        data = load_config(config_path) if config_path else {}
        if data.get("command", command) != command:
            raise ConfigError(f"config is for {data['command']!r}, not {command!r}")
        data["command"] = command
        return _resolve(data, overrides)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))


def _grid_override(k_min, k_max):
    if k_min is None and k_max is None:
        return None
    if k_min is None or k_max is None:
        raise click.UsageError("--k-min and --k-max go together")
    return {"k_min": k_min, "k_max": k_max}


def _model_spec(name, nu, alpha, params):
    if name is None:
        return None
    from .experiments import catalog_models

    for cm in catalog_models():
        if cm.id == name and nu is None and alpha is None and not params:
            return cm.model.to_spec()
    spec = {"family": name}
    if nu is not None:
        spec["nu"] = nu
    if alpha is not None:
        spec["alpha"] = alpha
    for item in params:
        if "=" not in item:
            raise click.UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            spec[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            spec[k.strip()] = v
    return spec


_config_option = click.option(
    "--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON run configuration."
)
_timestamp_option = click.option(
    "--timestamp/--no-timestamp", default=None, help="Write a timestamp header line (default on)."
)
_csv_option = click.option("--output", "-o", "csv", default=None, help="CSV output file (default stdout).")
_plot_option = click.option("--plot", default=None, help="Figure file, .svg or .png.")


@click.group()
@click.version_option(__version__, prog_name="screenlab")
def main():
    """Screening-effect experiments for kriging predictors."""


# -- sweep ------------------------------------------------------------------


@main.command()
@_config_option
@click.option("--scenario", default=None, help="Catalog scenario id.")
@click.option("--k-min", type=int, default=None, help="Grid eps = 2^-k starts at this k.")
@click.option("--k-max", type=int, default=None, help="Grid eps = 2^-k ends at this k.")
@click.option("--mean-model", type=click.Choice(["simple", "ordinary"]), default=None)
@click.option("--precision", type=click.Choice(PRECISIONS), default=None, help="Overrides $KRIGE_PRECISION.")
@_csv_option
@_plot_option
@_timestamp_option
def sweep(config_path, scenario, k_min, k_max, mean_model, precision, csv, plot, timestamp):
    """Screening ratios along an eps grid with the extrapolated limit."""
    from .experiments import run_sweep

    cfg = _config(
        "sweep", config_path, scenario=scenario, epsilon_grid=_grid_override(k_min, k_max),
        mean_model=mean_model, precision=precision, csv=csv, plot=plot, timestamp=timestamp,
    )
    try:
        sw = run_sweep(cfg.scenario, cfg.epsilons, mean_model=cfg.mean_model, precision=cfg.precision)
    except (KrigingError, ArithmeticError) as exc:
        _fail(EXIT_NUMERICAL, str(exc))
    if not sw.successful:
        _fail(EXIT_NUMERICAL, "no eps value could be solved: " + sw.records[0].error)
    t = _Table(SWEEP_COLUMNS, f"sweep {sw.scenario}", cfg.timestamp)
    for r in sw.records:
        t.row([sw.scenario, _num(r.epsilon), _num(r.mse_near), _num(r.mse_full), _num(r.ratio), _num(r.condition), r.precision or "failed"])
    ex = sw.extrapolation
    t.footer("extrapolated_limit", _num(None if ex is None else ex.limit))
    t.footer("uncertainty", _num(None if ex is None else ex.uncertainty))
    t.footer("reference_limit", _num(sw.reference_limit))
    t.footer("verdict", sw.verdict)
    t.emit(cfg.csv_path)
    if cfg.plot_path is not None:
        from .plotting import plot_sweep

        plot_sweep(sw, cfg.plot_path)
    if sw.verdict in ("fail",) or (sw.verdict == "inconclusive" and sw.reference_limit is not None):
        sys.exit(EXIT_MISMATCH)


# -- spectral -----------------------------------------------------------------


@main.group()
def spectral():
    """Frequency-domain diagnostics."""


@spectral.command()
@_config_option
@click.option("--scenario", default=None, help="Catalog scenario id.")
@click.option("--omega0", type=float, multiple=True, help="Band radius; repeatable.")
@click.option("--epsilon", "epsilons", type=float, multiple=True, help="Scale eps; repeatable (default 2^-4 .. 2^-10).")
@click.option("--residual", type=click.Choice(["near", "full"]), default="near", show_default=True,
              help="Residual of the near-only or of the near-plus-far predictor.")
@_csv_option
@_timestamp_option
def band(config_path, scenario, omega0, epsilons, residual, csv, timestamp):
    """Share of the kriging error variance from frequencies |w| < omega0."""
    from .kriging import simple_krige
    from .spectral import TrigPolynomial, band_fraction_estimate
    from .quadrature import QuadratureError

    cfg = _config(
        "band", config_path, scenario=scenario, omega0=list(omega0) or None,
        epsilon_grid=sorted(set(epsilons), reverse=True) or None, csv=csv, timestamp=timestamp,
    )
    sc = cfg.scenario
    grid = cfg.epsilons or tuple(2.0**-k for k in (4, 6, 8, 10))
    rows = []
    try:
        for eps in grid:
            near, far = sc.sites.materialize(eps)
            sites = near if residual == "near" else near + far
            poly = TrigPolynomial.residual(simple_krige(sc.model, sites, precision=cfg.precision))
            for w0 in cfg.omega0:
                res = band_fraction_estimate(poly, sc.model, w0, rtol=cfg.rtol)
                rows.append((w0, eps, res.value, res.error))
    except (KrigingError, QuadratureError, ArithmeticError) as exc:
        _fail(EXIT_NUMERICAL, str(exc))
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))
    t = _Table(("omega0", "epsilon", "value", "error_estimate", "verdict"), f"band {sc.id}", cfg.timestamp)
    for w0 in cfg.omega0:
        vals = [r[2] for r in rows if r[0] == w0]
        if len(vals) < 2:
            verdict = "single-eps"
        elif vals[-1] < 0.05 and vals[-1] < 0.5 * vals[0]:
            verdict = "vanishing"
        else:
            verdict = "persistent"
        for r in rows:
            if r[0] == w0:
                t.row([_num(r[0]), _num(r[1]), _num(r[2]), _num(r[3]), verdict])
    t.footer("residual", residual)
    t.emit(cfg.csv_path)


@spectral.command()
@_config_option
@click.option("--model", "model_name", default=None, help="Family name or catalog model id.")
@click.option("--nu", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--param", "params", multiple=True, help="Extra model parameter key=value; repeatable.")
@click.option("--R", "radius", type=float, default=None, help="Ball radius (default 1).")
@click.option("--omega-min", type=float, default=None)
@click.option("--omega-max", type=float, default=None)
@click.option("--points", type=int, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--expect", type=click.Choice(["consistent", "violated"]), default=None,
              help="Exit 1 when the verdict differs.")
@_csv_option
@_plot_option
@_timestamp_option
def fcond(config_path, model_name, nu, alpha, params, radius, omega_min, omega_max, points, threshold, expect, csv, plot, timestamp):
    """Slow-variation profile c(w) = sup_{|v|<R} |f(w+v)/f(w) - 1| (heuristic verdict)."""
    from .spectral import fcond_profile

    try:
        spec = _model_spec(model_name, nu, alpha, params)
    except click.UsageError as exc:
        _fail(EXIT_CONFIG, exc.message)
    cfg = _config(
        "fcond", config_path, model=spec, csv=csv, plot=plot, timestamp=timestamp,
        fcond={"R": radius, "omega_min": omega_min, "omega_max": omega_max, "points": points, "threshold": threshold},
    )
    s = cfg.fcond
    grid = np.geomspace(s.omega_min, s.omega_max, s.points)
    try:
        prof = fcond_profile(cfg.model, s.R, grid, threshold=s.threshold)
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))
    t = _Table(("omega", "value", "error_estimate", "verdict"), f"fcond {cfg.model.family}", cfg.timestamp)
    bad = set(prof.violations)
    for w, v, e in zip(prof.omegas, prof.values, prof.errors):
        t.row([_num(w), _num(v), _num(e), "zero-in-ball" if float(w) in bad else "ok"])
    t.footer("verdict", f"{prof.verdict} (heuristic)")
    t.footer("threshold", _num(prof.threshold))
    t.emit(cfg.csv_path)
    if cfg.plot_path is not None:
        from .plotting import plot_fcond

        plot_fcond(prof, cfg.plot_path, cfg.model.family)
    if expect is not None and prof.verdict != expect:
        sys.exit(EXIT_MISMATCH)


# -- lemma1 -------------------------------------------------------------------


@main.command()
@_config_option
@click.option("--instance", default=None, help="Instance id (see `screenlab catalog`).")
@click.option("--k-min", type=int, default=None)
@click.option("--k-max", type=int, default=None)
@_csv_option
@_plot_option
@_timestamp_option
def lemma1(config_path, instance, k_min, k_max, csv, plot, timestamp):
    """Covariance matrices of rescaled combinations against their limits."""
    from .experiments import lemma1_instances, verify_lemma1

    cfg = _config(
        "lemma1", config_path, instance=instance, epsilon_grid=_grid_override(k_min, k_max),
        csv=csv, plot=plot, timestamp=timestamp,
    )
    inst = next(i for i in lemma1_instances() if i.id == cfg.instance)
    rep = verify_lemma1(inst, cfg.epsilons)
    if not any(s.matrix is not None for s in rep.steps):
        _fail(EXIT_NUMERICAL, rep.steps[-1].error)
    t = _Table(("epsilon", "max_abs_deviation", "verdict"), f"lemma1 {inst.id}", cfg.timestamp)
    for s in rep.steps:
        if s.matrix is None:
            verdict = "failed"
        else:
            verdict = "within" if s.max_abs_deviation < inst.tolerance else "outside"
        t.row([_num(s.epsilon), _num(s.max_abs_deviation), verdict])
    t.footer("tolerance", _num(inst.tolerance))
    t.footer("verdict", rep.verdict)
    t.emit(cfg.csv_path)
    if cfg.plot_path is not None:
        from .plotting import plot_lemma1

        plot_lemma1(rep, cfg.plot_path)
    if rep.verdict != "converged":
        sys.exit(EXIT_MISMATCH)


# -- catalog and selfcheck ------------------------------------------------------


@main.command("catalog")
@click.option("--json", "as_json", is_flag=True, help="Dump the raw catalog file.")
def catalog_cmd(as_json):
    """List scenarios, models and covariance-limit instances."""
    from .experiments import catalog, catalog_models, lemma1_instances, load_catalog

    if as_json:
        click.echo(json.dumps(load_catalog(), indent=1))
        return
    click.echo("scenarios:")
    for sc in catalog():
        ref = "-" if sc.reference_limit is None else f"{sc.reference_limit:.6f}"
        flags = f" [{', '.join(sc.flags)}]" if sc.flags else ""
        click.echo(f"  {sc.id:24s} {sc.model.family:20s} d={sc.model.dim}  limit {ref} = {sc.reference_expr}{flags}")
    click.echo("models (fcond):")
    for cm in catalog_models():
        click.echo(f"  {cm.id:24s} {cm.model.family:20s} expected {cm.fcond}")
    click.echo("lemma1 instances:")
    for inst in lemma1_instances():
        click.echo(f"  {inst.id:24s} {len(inst.rows)} rows, tolerance {inst.tolerance:g}")


@main.command()
@click.option("--criterion", "-c", type=int, multiple=True, help="Run only these criteria.")
@click.option("--verbose", "-v", is_flag=True, help="Show every individual check.")
def selfcheck(criterion, verbose):
    """Run the acceptance suite; exit 1 on any failure."""
    from .acceptance import CHECKS, run_all

    bad = [n for n in criterion if n not in CHECKS]
    if bad:
        _fail(EXIT_CONFIG, f"unknown criteria {bad}; choose from 1..{max(CHECKS)}")

    def show(res):
        click.echo(res.line())
        if verbose or not res.passed:
            for line in res.details:
                click.echo(f"    {line}")

    results = run_all(list(criterion) or None, progress=show)
    failed = [r.number for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if failed:
        sys.exit(EXIT_MISMATCH)


if __name__ == "__main__":  # pragma: no cover
    main()
