"""Minimal self-contained SVG line charts for harness CSV output."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


@dataclass(frozen=True)
class PlotStyle:
    x: str = "n"
    y: str = "mean_rel_error"
    err: str | None = "sd_rel_error"
    group: str | None = "j"
    log_y: bool = True
    log_x: bool = False
    title: str = ""
    where: tuple[tuple[str, str], ...] = ()
    width: int = 640
    height: int = 420
    margin: int = 60


def _read_rows(csv_path: Path, style: PlotStyle) -> list[dict[str, str]]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{csv_path}: no header")
        need = [style.x, style.y] + [c for c in (style.err, style.group) if c]
        missing = [c for c in need if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{csv_path}: missing columns {missing}")
        rows = [r for r in reader if all(r.get(k) == v for k, v in style.where)]
    return rows


def render_plot(csv_path, out_path, style: PlotStyle = PlotStyle()) -> Path:
    """Draw one polyline per group with optional one-sd error bars; returns the SVG path."""
    csv_path, out_path = Path(csv_path), Path(out_path)
    rows = _read_rows(csv_path, style)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows to plot")
    try:
        pts = [(float(r[style.x]), float(r[style.y]), float(r[style.err]) if style.err else 0.0,
                r[style.group] if style.group else "") for r in rows]
    except ValueError as exc:
        raise ValueError(f"{csv_path}: malformed numeric field ({exc})") from None
    if style.log_y and any(p[1] <= 0 for p in pts):
        raise ValueError("log y-axis needs positive values")
    svg = _svg(pts, style)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(svg)
    return out_path


def _svg(pts, style: PlotStyle) -> str:
    W, H, M = style.width, style.height, style.margin
    fy = math.log10 if style.log_y else (lambda v: v)
    fx = math.log10 if style.log_x else (lambda v: v)
    xs = [fx(p[0]) for p in pts]
    lo_vals = [p[1] - p[2] for p in pts]
    hi_vals = [p[1] + p[2] for p in pts]
    if style.log_y:
        ymin = min(math.log10(p[1]) if lo <= 0 else math.log10(lo) for p, lo in zip(pts, lo_vals))
        ymax = max(math.log10(h) for h in hi_vals)
        ymin, ymax = math.floor(ymin), math.ceil(ymax)
    else:
        ymin, ymax = min(lo_vals), max(hi_vals)
    if ymax == ymin:
        ymax = ymin + 1.0
    xmin, xmax = min(xs), max(xs)
    if xmax == xmin:
        xmax = xmin + 1.0

    def X(v):
        return M + (v - xmin) / (xmax - xmin) * (W - 2 * M)

    def Y(v):
        return H - M - (v - ymin) / (ymax - ymin) * (H - 2 * M)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<line class="axis" x1="{M}" y1="{H - M}" x2="{W - M}" y2="{H - M}" stroke="black"/>',
           f'<line class="axis" x1="{M}" y1="{M}" x2="{M}" y2="{H - M}" stroke="black"/>']
    if style.title:
        out.append(f'<text x="{W / 2:.1f}" y="{M / 2:.1f}" text-anchor="middle">{style.title}</text>')
    if style.log_y:
        for e in range(int(ymin), int(ymax) + 1):
            y = Y(e)
            out.append(f'<line x1="{M - 4}" y1="{y:.3f}" x2="{M}" y2="{y:.3f}" stroke="black"/>')
            out.append(f'<text class="ytick" x="{M - 6}" y="{y + 4:.3f}" text-anchor="end">1e{e}</text>')
    else:
        for k in range(6):
            v = ymin + k * (ymax - ymin) / 5
            out.append(f'<text class="ytick" x="{M - 6}" y="{Y(v) + 4:.3f}" text-anchor="end">{v:.3g}</text>')
    for xv in sorted(set(p[0] for p in pts)):
        out.append(f'<text class="xtick" x="{X(fx(xv)):.3f}" y="{H - M + 16}" text-anchor="middle">{xv:g}</text>')
    out.append(f'<text x="{W / 2:.1f}" y="{H - 12}" text-anchor="middle">{style.x}</text>')
    out.append(f'<text x="14" y="{H / 2:.1f}" transform="rotate(-90 14 {H / 2:.1f})" text-anchor="middle">'
               f'{style.y}</text>')

    groups: dict[str, list] = {}
    for p in pts:
        groups.setdefault(p[3], []).append(p)
    for gi, (g, gp) in enumerate(sorted(groups.items(), key=lambda kv: _sort_key(kv[0]))):
        colour = PALETTE[gi % len(PALETTE)]
        gp.sort(key=lambda p: p[0])
        path = " ".join(f"{X(fx(p[0])):.3f},{Y(fy(p[1])):.3f}" for p in gp)
        out.append(f'<polyline class="series" data-group="{g}" points="{path}" fill="none" stroke="{colour}"/>')
        for p in gp:
            cx, cy = X(fx(p[0])), Y(fy(p[1]))
            out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="2.5" fill="{colour}"/>')
            if style.err and p[2] > 0:
                lo = p[1] - p[2]
                y_hi = Y(fy(p[1] + p[2]))
                y_lo = Y(fy(lo)) if (lo > 0 or not style.log_y) else H - M
                out.append(f'<line class="errbar" data-sd="{p[2]!r}" x1="{cx:.3f}" y1="{y_lo:.6f}" '
                           f'x2="{cx:.3f}" y2="{y_hi:.6f}" stroke="{colour}"/>')
        if style.group:
            out.append(f'<text x="{W - M + 4}" y="{M + 14 * gi:.1f}" fill="{colour}">{style.group}={g}</text>')
    out.append("</svg>")
    return "\n".join(out)


def _sort_key(v: str):
    try:
        return (0, float(v), v)
    except ValueError:
        return (1, 0.0, v)
