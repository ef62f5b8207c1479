"""Alpha-convex hull of a planar sample as an immutable query structure.

The hull is handled through its closing characterisation: with
F = {y : dist(y, X) >= alpha} the set of admissible empty-ball centres,
a point belongs to the hull iff dist(x, F) >= alpha. F is bounded by the
uncovered arcs of the circles of radius alpha around the sample points, so
dist(x, F) (the *clearance*) is the distance to those arcs whenever x is
within alpha of the sample, and zero otherwise. Clearance is 1-Lipschitz,
which is what makes the quadtree area bounds certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels as K
from .geom import (
    TWO_PI,
    AngularInterval,
    Arc,
    GridIndex,
    Point,
    as_array,
    convex_hull,
    dedupe,
)

MAX_DEPTH = 40
DEFAULT_RELATIVE_TOLERANCE = 1e-4
# arc endpoints are circle intersections, so a sample point's clearance can round
# a few ulps below alpha; the closed convention absorbs that
CONTAINS_RTOL = 1e-12


class ToleranceUnreachable(RuntimeError):
    pass


@dataclass(frozen=True)
class AreaEstimate:
    lower: float
    upper: float
    value: float
    tolerance_used: float
    cells_processed: int

    @property
    def half_width(self) -> float:
        return (self.upper - self.lower) / 2.0


class AlphaHull:
    """Alpha-convex hull of a finite sample (closed-hull convention)."""

    def __init__(self, points, alpha: float):
        if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and alpha > 0):
            raise ValueError(f"alpha must be a positive finite number, got {alpha!r}")
        pts = as_array(points)
        if len(pts) == 0:
            raise ValueError("empty sample")
        self.alpha = float(alpha)
        self._pts = np.ascontiguousarray(dedupe(pts))
        self._pts.setflags(write=False)
        self.grid = GridIndex.build(self._pts, self.alpha)
        g = self.grid
        self._pgrid = np.array([g.origin.x, g.origin.y, g.cell_size, g.shape[0], g.shape[1]], dtype=float)

        # occupancy raster: cell diagonal 0.99 alpha, so a non-empty cell is near the sample
        ocs = 0.99 * self.alpha / math.sqrt(2.0)
        olo = self._pts.min(axis=0)
        oij = np.floor((self._pts - olo) / ocs).astype(np.int64)
        onx, ony = int(oij[:, 0].max()) + 1, int(oij[:, 1].max()) + 1
        self._occ = np.zeros(onx * ony, dtype=np.bool_)
        self._occ[oij[:, 0] * ony + oij[:, 1]] = True
        self._ogrid = np.array([olo[0], olo[1], ocs, onx, ony], dtype=float)

        owner, start, extent = K.free_arcs(self._pts, self.alpha, g.origin.x, g.origin.y, g.cell_size,
                                           g.shape[0], g.shape[1], g.cell_start, g.items)
        order = np.lexsort((start, owner))
        self._owner = owner[order]
        self._start = start[order]
        self._extent = extent[order]
        c = self._pts[self._owner]
        end = self._start + self._extent
        self._arcs = np.ascontiguousarray(np.column_stack([
            c[:, 0], c[:, 1],
            np.cos(self._start), np.sin(self._start),
            np.cos(end), np.sin(end),
            self._extent,
        ]))
        if len(self._arcs) == 0:
            self._arcs = np.zeros((0, 7))

        # arc index: cells of alpha/2 over the sample bbox padded by alpha
        acs = self.alpha / 2.0
        lo = self._pts.min(axis=0) - self.alpha
        hi = self._pts.max(axis=0) + self.alpha
        nx = int(math.floor((hi[0] - lo[0]) / acs)) + 1
        ny = int(math.floor((hi[1] - lo[1]) / acs)) + 1
        self._agrid = np.array([lo[0], lo[1], acs, nx, ny], dtype=float)
        self._acell_start, self._aitems = K.arc_grid(self._arcs, self.alpha, lo[0], lo[1], acs, nx, ny)

        self.outer_hull = convex_hull(self._pts)
        self._threshold = self.alpha * (1.0 - CONTAINS_RTOL)

    @property
    def points(self) -> list[Point]:
        return [Point(float(x), float(y)) for x, y in self._pts]

    @property
    def points_array(self) -> np.ndarray:
        return self._pts

    @property
    def n_arcs(self) -> int:
        return len(self._arcs)

    @cached_property
    def free_boundary(self) -> list[Arc]:
        """Uncovered arcs bounding the free-centre region, ordered by (point index, start)."""
        return [
            Arc(Point(float(self._pts[i, 0]), float(self._pts[i, 1])), self.alpha,
                AngularInterval(float(s), float(e)))
            for i, s, e in zip(self._owner, self._start, self._extent)
        ]

    def boundary_arcs(self) -> list[Arc]:
        return list(self.free_boundary)

    def _kernel_args(self):
        return (self.alpha, self._pts, self._pgrid, self.grid.cell_start, self.grid.items,
                self._occ, self._ogrid, self._arcs, self._agrid, self._acell_start, self._aitems)

    def clearance(self, x) -> float:
        """Distance from x to the free-centre region F."""
        qx, qy = _xy(x)
        # any arc point is within diam + alpha of a sample point closer than alpha
        cap = float(np.hypot(*np.ptp(self._pts, axis=0))) + 3.0 * self.alpha
        return float(K.capped_clearance(qx, qy, cap, *self._kernel_args()))

    def clearance_many(self, xy, cap: float | None = None) -> np.ndarray:
        """Vectorised clearance, truncated at `cap` (defaults to an untruncated value)."""
        q = np.ascontiguousarray(as_array(xy))
        if cap is None:
            cap = float(np.hypot(*np.ptp(self._pts, axis=0))) + 3.0 * self.alpha
        return K.clearance_many(q, float(cap), *self._kernel_args())

    def contains(self, x) -> bool:
        qx, qy = _xy(x)
        return bool(K.capped_clearance(qx, qy, self.alpha, *self._kernel_args()) >= self._threshold)

    def contains_many(self, xy) -> np.ndarray:
        q = np.ascontiguousarray(as_array(xy))
        if len(q) == 0:
            return np.zeros(0, dtype=bool)
        return K.clearance_many(q, self.alpha, *self._kernel_args()) >= self._threshold

    def default_tolerance(self) -> float:
        x0, y0, x1, y1 = self.outer_hull.bbox()
        return DEFAULT_RELATIVE_TOLERANCE * (x1 - x0) * (y1 - y0)

    def area(self, tolerance: float | None = None) -> AreaEstimate:
        """Certified bounds on the Lebesgue measure of the hull.

        Level-synchronous quadtree over the bounding box of the convex hull;
        refinement stops once the undecided area is at most 2 * tolerance.
        """
        if tolerance is None:
            tolerance = self.default_tolerance()
        if not tolerance > 0:
            raise ValueError("tolerance must be positive")
        poly = self.outer_hull
        if len(poly.vertices) < 3:
            return AreaEstimate(0.0, 0.0, 0.0, float(tolerance), 0)
        x0, y0, x1, y1 = poly.bbox()
        verts = np.ascontiguousarray(poly.array)
        hx, hy = (x1 - x0) / 2.0, (y1 - y0) / 2.0
        cx = np.array([x0 + hx])
        cy = np.array([y0 + hy])
        inside_cells = 0
        # lower = sum over levels of inside_count * cell_area; integer counts keep it order free
        lower_terms = []
        processed = 0
        args = self._kernel_args()
        for depth in range(MAX_DEPTH + 1):
            rho = math.hypot(hx, hy)
            cell_area = 4.0 * hx * hy
            status = K.classify_cells(cx, cy, rho, *args)
            processed += len(cx)
            und = status == 2
            if und.any():
                out = K.outside_polygon(cx[und], cy[und], hx, hy, verts)
                idx = np.flatnonzero(und)[out]
                status[idx] = 0
                und = status == 2
            inside_cells = int(np.count_nonzero(status == 1))
            lower_terms.append(inside_cells * cell_area)
            n_und = int(np.count_nonzero(und))
            undecided = n_und * cell_area
            if undecided <= 2.0 * tolerance:
                lower = math.fsum(lower_terms)
                upper = lower + undecided
                return AreaEstimate(lower, upper, (lower + upper) / 2.0, float(tolerance), processed)
            if depth == MAX_DEPTH:
                break
            ux, uy = cx[und], cy[und]
            hx, hy = hx / 2.0, hy / 2.0
            cx = np.concatenate([ux - hx, ux + hx, ux - hx, ux + hx])
            cy = np.concatenate([uy - hy, uy - hy, uy + hy, uy + hy])
        raise ToleranceUnreachable(f"tolerance {tolerance} not reached within depth {MAX_DEPTH}")

    def to_svg(self, width: int = 600) -> str:
        """Diagnostic drawing: sample points and the free-boundary arcs as SVG arc paths."""
        lo = self._pts.min(axis=0) - self.alpha
        hi = self._pts.max(axis=0) + self.alpha
        scale = width / max(hi[0] - lo[0], hi[1] - lo[1])
        height = int(math.ceil((hi[1] - lo[1]) * scale))

        def tx(p):
            x, y = p
            return (x - lo[0]) * scale, (hi[1] - y) * scale

        parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
        r = self.alpha * scale
        for arc in self.free_boundary:
            if arc.interval.is_full:
                cxs, cys = tx(arc.center)
                parts.append(f'<circle cx="{cxs:.3f}" cy="{cys:.3f}" r="{r:.3f}" fill="none" stroke="steelblue"/>')
                continue
            a, b = arc.endpoints
            ax, ay = tx(a)
            bx, by = tx(b)
            large = 1 if arc.interval.extent > math.pi else 0
            # y flip turns counterclockwise into SVG sweep-flag 0
            parts.append(f'<path d="M {ax:.3f} {ay:.3f} A {r:.3f} {r:.3f} 0 {large} 0 {bx:.3f} {by:.3f}" '
                         f'fill="none" stroke="steelblue"/>')
        for p in self._pts:
            px, py = tx(p)
            parts.append(f'<circle cx="{px:.3f}" cy="{py:.3f}" r="1.5" fill="black"/>')
        parts.append("</svg>")
        return "\n".join(parts)


def _xy(x) -> tuple[float, float]:
    if isinstance(x, Point):
        return x.x, x.y
    a, b = x
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("non-finite query point")
    return a, b


def build(points, alpha: float) -> AlphaHull:
    return AlphaHull(points, alpha)


def clearance(hull: AlphaHull, x) -> float:
    return hull.clearance(x)


def contains(hull: AlphaHull, x) -> bool:
    return hull.contains(x)


def area(hull: AlphaHull, tolerance: float | None = None) -> AreaEstimate:
    return hull.area(tolerance)


def boundary_arcs(hull: AlphaHull) -> list[Arc]:
    return hull.boundary_arcs()


__all__ = [
    "AlphaHull",
    "AreaEstimate",
    "ToleranceUnreachable",
    "TWO_PI",
    "area",
    "boundary_arcs",
    "build",
    "clearance",
    "contains",
]
