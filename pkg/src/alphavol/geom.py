"""Planar primitives: points, angular intervals, arcs, convex hulls and a grid index."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
DUPLICATE_TOL = 1e-12
ANGLE_TOL = 1e-9

# Shewchuk's static filter for orient2d
_EPS = np.finfo(float).eps / 2.0
_ORIENT_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS


class DuplicateCenterError(ValueError):
    """Two circle centers coincide; callers are expected to dedupe."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate in Point({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


def as_array(points) -> np.ndarray:
    """Coerce a list of Points, pairs or an (n, 2) array into a float (n, 2) array."""
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
    else:
        pts = list(points)
        if not pts:
            return np.empty((0, 2))
        arr = np.array([(p.x, p.y) if isinstance(p, Point) else tuple(p) for p in pts], dtype=float)
    arr = arr.reshape(-1, 2)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite coordinates in point set")
    return arr


def dedupe(points: np.ndarray, tol: float = DUPLICATE_TOL) -> np.ndarray:
    """Drop points within `tol` of an earlier point (keeps first occurrence)."""
    if len(points) < 2:
        return points
    order = np.lexsort((points[:, 1], points[:, 0]))
    srt = points[order]
    keep = np.ones(len(srt), dtype=bool)
    # exact duplicates sort adjacent; near-duplicates need a local scan along x
    j0 = 0
    for i in range(1, len(srt)):
        while srt[i, 0] - srt[j0, 0] > tol:
            j0 += 1
        for j in range(j0, i):
            if keep[j] and abs(srt[i, 1] - srt[j, 1]) <= tol and abs(srt[i, 0] - srt[j, 0]) <= tol:
                if math.hypot(*(srt[i] - srt[j])) <= tol:
                    keep[i] = False
                    break
    kept = np.sort(order[keep])
    return points[kept]


@dataclass(frozen=True)
class AngularInterval:
    """Counterclockwise interval [start, start + extent] on a circle."""

    start: float
    extent: float

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.extent)):
            raise ValueError("non-finite angular interval")
        if self.extent < 0 or self.extent > TWO_PI + ANGLE_TOL:
            raise ValueError(f"extent {self.extent} outside [0, 2pi]")
        ext = min(self.extent, TWO_PI)
        start = 0.0 if ext == TWO_PI else self.start % TWO_PI
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "extent", ext)

    @classmethod
    def full(cls) -> "AngularInterval":
        return cls(0.0, TWO_PI)

    @property
    def end(self) -> float:
        return self.start + self.extent

    @property
    def is_full(self) -> bool:
        return self.extent >= TWO_PI

    def contains(self, theta: float, tol: float = 0.0) -> bool:
        if self.is_full:
            return True
        off = (theta - self.start) % TWO_PI
        return off <= self.extent + tol or off >= TWO_PI - tol


def merge_intervals(intervals: Iterable[AngularInterval]) -> list[AngularInterval]:
    """Union of angular intervals as a sorted list of disjoint intervals.

    An interval crossing angle 0 is reported once, with its true start.
    """
    pieces: list[tuple[float, float]] = []
    for iv in intervals:
        if iv.extent <= 0.0:
            continue
        if iv.is_full:
            return [AngularInterval.full()]
        s, e = iv.start, iv.start + iv.extent
        if e > TWO_PI:
            pieces.append((s, TWO_PI))
            pieces.append((0.0, e - TWO_PI))
        else:
            pieces.append((s, e))
    if not pieces:
        return []
    pieces.sort()
    merged = [list(pieces[0])]
    for s, e in pieces[1:]:
        if s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if len(merged) == 1 and merged[0][0] <= 0.0 and merged[0][1] >= TWO_PI:
        return [AngularInterval.full()]
    if len(merged) > 1 and merged[0][0] <= 0.0 and merged[-1][1] >= TWO_PI:
        first = merged.pop(0)
        merged[-1][1] = TWO_PI + first[1]
    # pieces narrower than float resolution vanish here
    return sorted((AngularInterval(s, e - s) for s, e in merged if e - s > 0.0), key=lambda iv: iv.start)


def complement_intervals(intervals: Iterable[AngularInterval]) -> list[AngularInterval]:
    """Closed complement of a union of intervals on the circle."""
    merged = merge_intervals(intervals)
    if not merged:
        return [AngularInterval.full()]
    if merged[0].is_full:
        return []
    out = []
    k = len(merged)
    for i, iv in enumerate(merged):
        nxt = merged[(i + 1) % k]
        gap = (nxt.start - iv.end) % TWO_PI
        if k == 1:
            gap = TWO_PI - iv.extent
        if gap > 0.0:
            out.append(AngularInterval(iv.end, gap))
    return sorted(out, key=lambda iv: iv.start)


@dataclass(frozen=True)
class Arc:
    center: Point
    radius: float
    interval: AngularInterval

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("arc radius must be positive")

    def point_at(self, theta: float) -> Point:
        return Point(self.center.x + self.radius * math.cos(theta),
                     self.center.y + self.radius * math.sin(theta))

    def sample(self, k: int) -> np.ndarray:
        """k points spread along the arc, endpoints included."""
        t = self.interval.start + np.linspace(0.0, self.interval.extent, k)
        return np.column_stack([self.center.x + self.radius * np.cos(t),
                                self.center.y + self.radius * np.sin(t)])

    @property
    def endpoints(self) -> tuple[Point, Point]:
        return self.point_at(self.interval.start), self.point_at(self.interval.end)


def circle_circle_covered_interval(c1, c2, radius: float) -> AngularInterval | None:
    """Directions on the circle around `c1` lying strictly inside the open disk around `c2`.

    Both circles share `radius`. Returns None when the disks do not overlap
    (tangent pairs included).
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    x1, y1 = c1
    x2, y2 = c2
    dx, dy = x2 - x1, y2 - y1
    d = math.hypot(dx, dy)
    if d < DUPLICATE_TOL:
        raise DuplicateCenterError("duplicate center")
    if d >= 2.0 * radius - ANGLE_TOL:
        return None
    half = math.acos(d / (2.0 * radius))
    return AngularInterval(math.atan2(dy, dx) - half, 2.0 * half)


def circular_segment_area(radius: float, chord: float) -> float:
    """Area between a chord and its minor arc."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    if chord < 0 or chord > 2.0 * radius * (1 + 1e-12):
        raise ValueError(f"chord {chord} outside [0, 2*radius]")
    phi = 2.0 * math.asin(min(1.0, chord / (2.0 * radius)))
    return radius * radius * (phi - math.sin(phi)) / 2.0


def orient2d(a, b, c) -> float:
    """Sign-exact orientation of (a, b, c): >0 ccw, <0 cw, 0 collinear.

    Returns the floating determinant when its sign is certified by the
    error bound, otherwise recomputes exactly with rationals.
    """
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) > _ORIENT_ERRBOUND * detsum:
        return det
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (a[0], a[1], b[0], b[1], c[0], c[1]))
    exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return float(exact > 0) - float(exact < 0)


@dataclass(frozen=True)
class ConvexPolygon:
    """Counterclockwise vertex list; may be degenerate (point or segment)."""

    vertices: tuple[Point, ...]

    @property
    def array(self) -> np.ndarray:
        return as_array(self.vertices) if self.vertices else np.empty((0, 2))

    @property
    def area(self) -> float:
        return polygon_area(self)

    def bbox(self) -> tuple[float, float, float, float]:
        a = self.array
        return float(a[:, 0].min()), float(a[:, 1].min()), float(a[:, 0].max()), float(a[:, 1].max())

    def contains(self, xy, tol: float = 0.0) -> np.ndarray:
        """Vectorised closed point-in-polygon test (degenerate polygons contain nothing)."""
        q = np.atleast_2d(np.asarray(xy, dtype=float))
        v = self.array
        if len(v) < 3:
            return np.zeros(len(q), dtype=bool)
        inside = np.ones(len(q), dtype=bool)
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            edge = b - a
            cross = edge[0] * (q[:, 1] - a[1]) - edge[1] * (q[:, 0] - a[0])
            inside &= cross >= -tol * math.hypot(*edge)
        return inside


def convex_hull(points) -> ConvexPolygon:
    """Andrew's monotone chain with exact orientation; collinear points dropped."""
    arr = as_array(points)
    if len(arr) == 0:
        raise ValueError("empty sample")
    pts = sorted(set(map(tuple, arr.tolist())))
    if len(pts) <= 2:
        return ConvexPolygon(tuple(Point(*p) for p in pts))

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and orient2d(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return ConvexPolygon(tuple(Point(*p) for p in hull))


def polygon_area(p: ConvexPolygon) -> float:
    """Shoelace area; zero for fewer than three vertices."""
    v = p.array
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    terms = x * np.roll(y, -1) - np.roll(x, -1) * y
    return abs(math.fsum(terms.tolist())) / 2.0


def regular_polygon(n: int, radius: float = 1.0, phase: float = 0.0) -> np.ndarray:
    t = phase + TWO_PI * np.arange(n) / n
    return np.column_stack([radius * np.cos(t), radius * np.sin(t)])


@dataclass(frozen=True)
class GridIndex:
    """Uniform bucket grid over a point array, stored as sorted cell runs.

    Bucket (i, j) holds the indices of points with
    floor((p - origin) / cell_size) == (i, j).
    """

    cell_size: float
    origin: Point
    shape: tuple[int, int]
    cell_start: np.ndarray = field(repr=False)
    items: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, points: np.ndarray, cell_size: float) -> "GridIndex":
        if not cell_size > 0:
            raise ValueError("cell_size must be positive")
        pts = np.ascontiguousarray(points, dtype=float)
        if len(pts) == 0:
            lo = np.zeros(2)
        else:
            lo = pts.min(axis=0)
        ij = np.floor((pts - lo) / cell_size).astype(np.int64) if len(pts) else np.zeros((0, 2), np.int64)
        nx = int(ij[:, 0].max()) + 1 if len(pts) else 1
        ny = int(ij[:, 1].max()) + 1 if len(pts) else 1
        keys = ij[:, 0] * ny + ij[:, 1]
        items = np.argsort(keys, kind="stable").astype(np.int64)
        counts = np.bincount(keys, minlength=nx * ny)
        cell_start = np.zeros(nx * ny + 1, dtype=np.int64)
        np.cumsum(counts, out=cell_start[1:])
        return cls(float(cell_size), Point(float(lo[0]), float(lo[1])), (nx, ny), cell_start, items, pts)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (math.floor((x - self.origin.x) / self.cell_size),
                math.floor((y - self.origin.y) / self.cell_size))

    @property
    def buckets(self) -> dict[tuple[int, int], list[int]]:
        nx, ny = self.shape
        out = {}
        for key in range(nx * ny):
            a, b = self.cell_start[key], self.cell_start[key + 1]
            if b > a:
                out[(key // ny, key % ny)] = self.items[a:b].tolist()
        return out

    def query(self, center, radius: float) -> list[int]:
        """Indices of points in every bucket touching the square around the disk (a superset)."""
        cx, cy = center
        nx, ny = self.shape
        i0, j0 = self.cell_of(cx - radius, cy - radius)
        i1, j1 = self.cell_of(cx + radius, cy + radius)
        out: list[int] = []
        for i in range(max(i0, 0), min(i1, nx - 1) + 1):
            for j in range(max(j0, 0), min(j1, ny - 1) + 1):
                key = i * ny + j
                out.extend(self.items[self.cell_start[key]:self.cell_start[key + 1]].tolist())
        return out

    def query_exact(self, center, radius: float) -> list[int]:
        cand = self.query(center, radius)
        if not cand:
            return []
        d = np.hypot(self.points[cand, 0] - center[0], self.points[cand, 1] - center[1])
        return [c for c, dd in zip(cand, d) if dd <= radius]


def points_from(seq: Sequence) -> list[Point]:
    return [Point(float(x), float(y)) for x, y in as_array(seq)]
