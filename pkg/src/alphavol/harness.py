"""Reproducible Monte Carlo experiments: error curves, CI coverage, convex-case comparison.

Every replicate draws from its own counter-based stream keyed by
(seed, experiment id, n, replicate, ...), so results do not depend on the
number of worker threads or on how the replicate range is split across runs.
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from .domains import Domain, parse_domain
from .estimators import (
    bagged_estimate,
    convex_hull_area,
    naive_oracle,
    plug_in,
    split_estimate,
    volume_ci,
)
from .plot import PlotStyle, render_plot

log = logging.getLogger(__name__)

EXP_ERROR_CURVE = 1
EXP_COVERAGE = 2
EXP_CONVEX = 3
EXP_ESTIMATE = 4

DEFAULT_LEVELS = (0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for an integer key path."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


# per-kind defaults for fields left unset
KIND_DEFAULTS = {
    "error-curve": {"domain": "annulus(0.25,1)", "alpha_list": [0.15, 0.25, 0.35],
                    "n_list": [250, 500, 1000, 2000, 4000], "m_rule": list(range(1, 11))},
    "coverage": {"domain": "annulus(0.25,1)", "alpha_list": [0.25],
                 "n_list": [200, 500, 1000], "m_rule": [5]},
    "convex-compare": {"domain": "ellipse(5,2)", "alpha_list": [10.0],
                       "n_list": [250, 500, 1000, 2000], "m_rule": [5]},
}


@dataclass
class ExperimentConfig:
    """Reproducible experiment description; unset list fields take per-kind defaults."""

    kind: str = "error-curve"
    domain: str | None = None
    alpha_list: list[float] | None = None
    n_list: list[int] | None = None
    m_rule: list[int] | None = None
    replicates: int = 200
    replicate_offset: int = 0
    bag_count: int = 0
    seed: int = 20151
    tolerance: float = 2e-3
    ci_levels: list[float] = field(default_factory=lambda: list(DEFAULT_LEVELS))
    output_dir: Path = Path("results")
    threads: int = 1
    log_y: bool = True

    def __post_init__(self):
        for key, val in KIND_DEFAULTS.get(self.kind, {}).items():
            if getattr(self, key) is None:
                setattr(self, key, list(val) if isinstance(val, list) else val)
        self.output_dir = Path(self.output_dir)

    def validate(self) -> None:
        kinds = ("error-curve", "coverage", "convex-compare")
        if self.kind not in kinds:
            raise ValueError(f"kind must be one of {kinds}")
        parse_domain(self.domain)
        if not self.n_list or any(n < 2 for n in self.n_list):
            raise ValueError("n_list must be nonempty with every n >= 2")
        if not self.alpha_list or any(not a > 0 for a in self.alpha_list):
            raise ValueError("alpha_list must be nonempty and positive")
        if not self.m_rule or any(not (1 <= j <= 10) for j in self.m_rule):
            raise ValueError("m_rule entries must lie in 1..10")
        if self.replicates < 1 or self.replicate_offset < 0 or self.bag_count < 0:
            raise ValueError("replicates >= 1, replicate_offset >= 0, bag_count >= 0 required")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.kind == "coverage" and (not self.ci_levels or any(not 0 < lv < 1 for lv in self.ci_levels)):
            raise ValueError("ci_levels must be nonempty and inside (0, 1)")
        if self.kind == "coverage" and 10 in self.m_rule[:1]:
            raise ValueError("coverage needs a second subsample: m_rule j must be below 10")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @classmethod
    def from_text(cls, text: str, **overrides) -> "ExperimentConfig":
        """Parse line-oriented ``key = value`` text; ``#`` starts a comment."""
        kinds = {f.name: f for f in fields(cls)}
        aliases = {"B": "replicates", "b": "bag_count", "alpha": "alpha_list", "n": "n_list",
                   "j": "m_rule", "levels": "ci_levels"}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            key = aliases.get(key, key)
            if key not in kinds:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            values[key] = _coerce(key, val)
        values.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**values)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text(), **overrides)


def _coerce(key: str, val: str):
    if key in ("alpha_list", "ci_levels"):
        return [float(v) for v in val.replace(";", ",").split(",") if v.strip()]
    if key in ("n_list", "m_rule"):
        return [int(v) for v in val.replace(";", ",").split(",") if v.strip()]
    if key in ("replicates", "replicate_offset", "bag_count", "seed", "threads"):
        return int(val)
    if key == "tolerance":
        return float(val)
    if key == "output_dir":
        return Path(val)
    if key == "log_y":
        return val.lower() in ("1", "true", "yes", "on")
    return val


@dataclass(frozen=True)
class CurvePoint:
    n: int
    j: int
    alpha: float
    mean_rel_error: float
    sd_rel_error: float
    replicates: int


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def fit_rate(points: Iterable[tuple[float, float]]) -> RateFit:
    """Least-squares line through (log n, log error)."""
    pts = list(points)
    if any(e <= 0 for _, e in pts):
        raise ValueError("errors must be positive")
    if len({n for n, _ in pts}) < 3:
        raise ValueError("need at least three distinct n values")
    x = np.log([float(n) for n, _ in pts])
    y = np.log([float(e) for _, e in pts])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0))


def _pmap(fn: Callable, tasks: list, threads: int) -> list:
    if threads <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _mean_sd(values: list[float]) -> tuple[float, float]:
    mean = math.fsum(values) / len(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, sd


def _write_csv(path: Path, header: list[str], rows: Iterable[Iterable]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


# -- error curves -----------------------------------------------------------

RAW_HEADER = ["n", "j", "alpha", "replicate", "estimate", "rel_error"]
CURVE_HEADER = ["n", "j", "alpha", "mean_rel_error", "sd_rel_error", "replicates"]


def _error_curve_replicate(cfg: ExperimentConfig, dom: Domain, n: int, rep: int) -> list[tuple]:
    mu = dom.area
    sample = dom.sample(n, stream(cfg.seed, EXP_ERROR_CURVE, n, rep, 0))
    rows = []
    for ai, alpha in enumerate(cfg.alpha_list):
        plug = None
        for j in cfg.m_rule:
            if j == 10:
                if plug is None:
                    plug = plug_in(sample, alpha, cfg.tolerance).value
                v = plug
            else:
                m = max(1, (n * j) // 10)
                rng = stream(cfg.seed, EXP_ERROR_CURVE, n, rep, 1 + ai, j)
                if cfg.bag_count > 0:
                    v = bagged_estimate(sample, alpha, m, cfg.bag_count, cfg.tolerance, rng)
                else:
                    v = split_estimate(sample, alpha, m, cfg.tolerance, rng).v_hat
            rows.append((n, j, alpha, rep, v, abs(v - mu) / mu))
    return rows


def error_curve_records(cfg: ExperimentConfig) -> list[tuple]:
    """Per-replicate rows (n, j, alpha, replicate, estimate, rel_error) in a fixed order."""
    dom = parse_domain(cfg.domain)
    tasks = [(n, rep) for n in cfg.n_list
             for rep in range(cfg.replicate_offset, cfg.replicate_offset + cfg.replicates)]
    chunks = _pmap(lambda t: _error_curve_replicate(cfg, dom, *t), tasks, cfg.threads)
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return rows


def summarize_curve(rows: Iterable[tuple]) -> list[CurvePoint]:
    groups: dict[tuple, list[float]] = {}
    for n, j, alpha, _rep, _v, err in rows:
        groups.setdefault((int(n), int(j), float(alpha)), []).append(float(err))
    out = []
    for (n, j, alpha), errs in sorted(groups.items()):
        mean, sd = _mean_sd(errs)
        out.append(CurvePoint(n, j, alpha, mean, sd, len(errs)))
    return out


def run_error_curve(cfg: ExperimentConfig) -> list[CurvePoint]:
    """Mean and sd of |V - mu(S)| / mu(S) for every (n, j, alpha); writes CSVs and one SVG per alpha."""
    cfg.validate()
    rows = error_curve_records(cfg)
    points = summarize_curve(rows)
    out = Path(cfg.output_dir)
    tag = "error_curve_bagged" if cfg.bag_count > 0 else "error_curve"
    _write_csv(out / f"{tag}_raw.csv", RAW_HEADER, rows)
    summary = out / f"{tag}.csv"
    _write_csv(summary, CURVE_HEADER,
               ((p.n, p.j, p.alpha, p.mean_rel_error, p.sd_rel_error, p.replicates) for p in points))
    for alpha in cfg.alpha_list:
        if cfg.log_y and any(p.mean_rel_error <= 0 for p in points if p.alpha == alpha):
            log.warning("skipping plot for alpha=%s: zero mean error cannot go on a log axis", alpha)
            continue
        render_plot(summary, out / f"{tag}_alpha{alpha:g}.svg",
                    PlotStyle(x="n", y="mean_rel_error", err="sd_rel_error", group="j",
                              log_y=cfg.log_y, title=f"{cfg.domain}, alpha={alpha:g}",
                              where=(("alpha", fmt(alpha)),)))
    return points


# -- coverage table ---------------------------------------------------------

COVERAGE_HEADER = ["n", "level", "coverage", "mean_length", "replicates"]


def _coverage_replicate(cfg: ExperimentConfig, dom: Domain, n: int, rep: int) -> list[tuple[bool, float]]:
    alpha = cfg.alpha_list[0]
    j = cfg.m_rule[0]
    m = min(max(1, (n * j) // 10), n - 1)
    sample = dom.sample(n, stream(cfg.seed, EXP_COVERAGE, n, rep, 0))
    res = split_estimate(sample, alpha, m, cfg.tolerance, stream(cfg.seed, EXP_COVERAGE, n, rep, 1))
    out = []
    for level in cfg.ci_levels:
        ci = volume_ci(res, level)
        out.append((ci.covers(dom.area), ci.length))
    return out


def coverage_records(cfg: ExperimentConfig) -> dict[int, list[list[tuple[bool, float]]]]:
    dom = parse_domain(cfg.domain)
    reps = range(cfg.replicate_offset, cfg.replicate_offset + cfg.replicates)
    out = {}
    for n in cfg.n_list:
        out[n] = _pmap(lambda rep: _coverage_replicate(cfg, dom, n, rep), list(reps), cfg.threads)
    return out


def run_coverage(cfg: ExperimentConfig) -> list[dict]:
    """Empirical coverage and mean length of the volume CI per (n, level).

    Uses alpha = alpha_list[0] and m = floor(n * m_rule[0] / 10).
    """
    cfg.validate()
    recs = coverage_records(cfg)
    table = []
    for n, per_rep in recs.items():
        for li, level in enumerate(cfg.ci_levels):
            hits = [r[li][0] for r in per_rep]
            lengths = [r[li][1] for r in per_rep]
            table.append({"n": n, "level": level, "coverage": sum(hits) / len(hits),
                          "mean_length": math.fsum(lengths) / len(lengths), "replicates": len(hits)})
    _write_csv(Path(cfg.output_dir) / "coverage.csv", COVERAGE_HEADER,
               ([r[k] for k in COVERAGE_HEADER] for r in table))
    return table


# -- convex-case comparison -------------------------------------------------

CONVEX_HEADER = ["n", "estimator", "rmse_normalized", "mean_estimate", "replicates"]
CONVEX_ESTIMATORS = ("split", "convex_hull", "naive_oracle")


def _convex_replicate(cfg: ExperimentConfig, dom: Domain, n: int, rep: int) -> tuple[float, float, float]:
    lam = n / dom.area
    alpha = cfg.alpha_list[0]
    sample = dom.sample_poisson(lam, stream(cfg.seed, EXP_CONVEX, n, rep, 0))
    count = len(sample)
    if count >= 2:
        v = split_estimate(sample, alpha, count // 2, cfg.tolerance,
                           stream(cfg.seed, EXP_CONVEX, n, rep, 1)).v_hat
    else:
        v = 0.0
    return v, convex_hull_area(sample), naive_oracle(count, lam)


def convex_records(cfg: ExperimentConfig) -> dict[int, list[tuple[float, float, float]]]:
    dom = parse_domain(cfg.domain)
    reps = list(range(cfg.replicate_offset, cfg.replicate_offset + cfg.replicates))
    return {n: _pmap(lambda rep: _convex_replicate(cfg, dom, n, rep), reps, cfg.threads) for n in cfg.n_list}


def run_convex_comparison(cfg: ExperimentConfig) -> list[dict]:
    """Normalised RMSE of the split estimator against |C| and N / lambda under Poisson sampling."""
    cfg.validate()
    dom = parse_domain(cfg.domain)
    mu = dom.area
    recs = convex_records(cfg)
    table = []
    for n, per_rep in recs.items():
        for k, name in enumerate(CONVEX_ESTIMATORS):
            vals = [r[k] for r in per_rep]
            rmse = math.sqrt(math.fsum((v - mu) ** 2 for v in vals) / len(vals)) / mu
            table.append({"n": n, "estimator": name, "rmse_normalized": rmse,
                          "mean_estimate": math.fsum(vals) / len(vals), "replicates": len(vals)})
    out = Path(cfg.output_dir)
    path = out / "convex_compare.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVEX_HEADER)
        for r in table:
            w.writerow([fmt(r["n"]), r["estimator"], fmt(r["rmse_normalized"]),
                        fmt(r["mean_estimate"]), fmt(r["replicates"])])
    if all(r["rmse_normalized"] > 0 for r in table):
        render_plot(path, out / "convex_compare.svg",
                    PlotStyle(x="n", y="rmse_normalized", err=None, group="estimator",
                              log_y=True, log_x=True, title=f"{cfg.domain}, Poisson sampling"))
    return table


def rate_check(csv_path) -> dict[tuple[int, float], RateFit]:
    """Fit log-log slopes for every (j, alpha) series of an error-curve summary CSV."""
    series: dict[tuple[int, float], list[tuple[float, float]]] = {}
    with open(csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (int(row["j"]), float(row["alpha"]))
            series.setdefault(key, []).append((float(row["n"]), float(row["mean_rel_error"])))
    if not series:
        raise ValueError(f"{csv_path}: no rows")
    return {k: fit_rate(v) for k, v in sorted(series.items())}


RUNNERS = {
    "error-curve": run_error_curve,
    "coverage": run_coverage,
    "convex-compare": run_convex_comparison,
}


def iter_lines(points: Iterable[CurvePoint]) -> Iterator[str]:
    for p in points:
        yield f"n={p.n} j={p.j} alpha={p.alpha:g} mean={p.mean_rel_error:.5g} sd={p.sd_rel_error:.5g}"
