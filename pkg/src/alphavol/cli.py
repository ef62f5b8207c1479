"""Command-line entry point: hull queries, single estimates, experiments and rate checks."""

from __future__ import annotations

import csv
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import harness
from .domains import parse_domain
from .estimators import bagged_estimate, plug_in, split_estimate, volume_ci
from .hull import AlphaHull, ToleranceUnreachable


def read_points(path) -> np.ndarray:
    """Read a CSV with header ``x,y``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "y"} <= set(reader.fieldnames):
            raise click.BadParameter(f"{path}: expected a CSV header with columns x,y")
        try:
            rows = [(float(r["x"]), float(r["y"])) for r in reader]
        except (TypeError, ValueError) as exc:
            raise click.BadParameter(f"{path}: malformed coordinate ({exc})") from None
    return np.array(rows, dtype=float).reshape(-1, 2)


def _hull(points_csv, alpha) -> AlphaHull:
    try:
        return AlphaHull(read_points(points_csv), alpha)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool):
    """Alpha-convex hull volume estimation toolkit."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.group()
def hull():
    """Queries on the alpha-convex hull of a point file."""


@hull.command("area")
@click.argument("points_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, required=True)
@click.option("--tol", type=float, default=None, help="Absolute tolerance (default 1e-4 x bbox area).")
def hull_area(points_csv, alpha, tol):
    h = _hull(points_csv, alpha)
    try:
        est = h.area(tol)
    except (ValueError, ToleranceUnreachable) as exc:
        raise click.ClickException(str(exc)) from None
    click.echo(f"lower={est.lower!r} upper={est.upper!r} value={est.value!r} "
               f"tolerance={est.tolerance_used!r} cells={est.cells_processed}")


@hull.command("contains")
@click.argument("points_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, required=True)
@click.option("--x", "qx", type=float, required=True)
@click.option("--y", "qy", type=float, required=True)
def hull_contains(points_csv, alpha, qx, qy):
    h = _hull(points_csv, alpha)
    inside = h.contains((qx, qy))
    click.echo(f"{str(inside).lower()} clearance={h.clearance((qx, qy))!r}")


@hull.command("svg")
@click.argument("points_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, required=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True)
def hull_svg(points_csv, alpha, out):
    """Draw the sample and its free-boundary arcs."""
    Path(out).write_text(_hull(points_csv, alpha).to_svg())
    click.echo(out)


@main.command("estimate")
@click.argument("method", type=click.Choice(["split", "plugin", "bagged"]))
@click.option("--domain", "spec", required=True, help="e.g. 'annulus(0.25,1)'.")
@click.option("--n", type=int, required=True)
@click.option("--m", type=int, default=None, help="First-subsample size (default n/2).")
@click.option("--alpha", type=float, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--b", "bags", type=int, default=10, show_default=True, help="Bag count for 'bagged'.")
@click.option("--tol", type=float, default=None)
@click.option("--level", type=float, default=0.95, show_default=True)
def estimate(method, spec, n, m, alpha, seed, bags, tol, level):
    """Draw one uniform sample from DOMAIN and estimate its area."""
    try:
        dom = parse_domain(spec)
        sample = dom.sample(n, harness.stream(seed, harness.EXP_ESTIMATE, n, 0))
        m = n // 2 if m is None else m
        rng = harness.stream(seed, harness.EXP_ESTIMATE, n, 1)
        click.echo(f"true_area={dom.area!r}")
        if method == "plugin":
            est = plug_in(sample, alpha, tol)
            click.echo(f"estimate={est.value!r} lower={est.lower!r} upper={est.upper!r}")
        elif method == "bagged":
            click.echo(f"estimate={bagged_estimate(sample, alpha, m, bags, tol, rng)!r}")
        else:
            res = split_estimate(sample, alpha, m, tol, rng)
            ci = volume_ci(res, level)
            click.echo(f"estimate={res.v_hat!r} mu_hat={res.mu_hat_s!r} p_hat={res.p_hat!r} "
                       f"clamped={str(res.clamped).lower()}")
            click.echo(f"ci{level:g}=[{ci.lower!r}, {ci.upper!r}]")
    except (ValueError, ToleranceUnreachable) as exc:
        raise click.ClickException(str(exc)) from None


@main.command("experiment")
@click.argument("kind", type=click.Choice(sorted(harness.RUNNERS)))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--threads", type=int, default=None)
@click.option("--replicates", "-B", type=int, default=None, help="Override B (e.g. 500).")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
def experiment(kind, config_path, threads, replicates, output_dir):
    """Run an experiment described by a key = value config file."""
    try:
        cfg = harness.ExperimentConfig.from_file(config_path, kind=kind, threads=threads,
                                                 replicates=replicates, output_dir=output_dir)
        result = harness.RUNNERS[kind](cfg)
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc)) from None
    if kind == "error-curve":
        for line in harness.iter_lines(result):
            click.echo(line)
    else:
        for row in result:
            click.echo(" ".join(f"{k}={v}" for k, v in row.items()))
    click.echo(f"wrote {cfg.output_dir}")


@main.command("rate-check")
@click.option("--csv", "csv_path", type=click.Path(exists=True, dir_okay=False), required=True)
def rate_check(csv_path):
    """Fit log-log slopes of mean relative error against n, per (j, alpha)."""
    try:
        fits = harness.rate_check(csv_path)
    except (ValueError, KeyError) as exc:
        raise click.ClickException(f"cannot fit rates: {exc}") from None
    for (j, alpha), fit in fits.items():
        click.echo(f"j={j} alpha={alpha:g} slope={fit.slope:.4f} intercept={fit.intercept:.4f} "
                   f"r2={fit.r_squared:.4f}")


@main.command("plot")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True)
@click.option("--x", default="n")
@click.option("--y", default="mean_rel_error")
@click.option("--err", default="sd_rel_error", help="Column of one-sd error bars; '' for none.")
@click.option("--group", default="j")
@click.option("--log-y/--linear-y", default=True)
@click.option("--log-x/--linear-x", default=False)
def plot(csv_path, out, x, y, err, group, log_y, log_x):
    """Render a harness CSV as an SVG line chart."""
    from .plot import PlotStyle, render_plot
    style = PlotStyle(x=x, y=y, err=err or None, group=group or None, log_y=log_y, log_x=log_x)
    try:
        render_plot(csv_path, out, style)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    click.echo(out)


if __name__ == "__main__":
    sys.exit(main())
