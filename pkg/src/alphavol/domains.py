"""Sampling domains with exact areas and membership tests.

Includes the annulus and ellipse used in the experiments, plain disks, the
"dented ball" worlds of the lower-bound construction and a disk carrying a
two-level radial density.
"""

from __future__ import annotations

import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .geom import circular_segment_area

MIN_ACCEPTANCE = 1e-4


class Domain(ABC):
    """A compact planar set S with known area and a uniform sampler."""

    name: str
    r_inner: float | None = None

    @property
    @abstractmethod
    def area(self) -> float: ...

    @property
    @abstractmethod
    def bbox(self) -> tuple[float, float, float, float]: ...

    @abstractmethod
    def _contains(self, xy: np.ndarray) -> np.ndarray: ...

    def contains(self, xy) -> np.ndarray:
        q = np.atleast_2d(np.asarray(xy, dtype=float))
        x0, y0, x1, y1 = self.bbox
        inbox = (q[:, 0] >= x0) & (q[:, 0] <= x1) & (q[:, 1] >= y0) & (q[:, 1] <= y1)
        out = np.zeros(len(q), dtype=bool)
        if inbox.any():
            out[inbox] = self._contains(q[inbox])
        return out

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n IID uniform points; rejection from the bounding box unless overridden."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if n == 0:
            return np.empty((0, 2))
        x0, y0, x1, y1 = self.bbox
        acc = self.area / ((x1 - x0) * (y1 - y0))
        if acc < MIN_ACCEPTANCE:
            raise ValueError(f"rejection acceptance rate {acc:.2e} below {MIN_ACCEPTANCE}")
        out = []
        have = 0
        while have < n:
            want = int((n - have) / acc * 1.1) + 16
            cand = np.column_stack([rng.uniform(x0, x1, want), rng.uniform(y0, y1, want)])
            cand = cand[self._contains(cand)]
            out.append(cand)
            have += len(cand)
        return np.concatenate(out)[:n]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw from the domain's sampling law (uniform unless a subclass says otherwise)."""
        return self.sample_uniform(n, rng)

    def sample_poisson(self, lam: float, rng: np.random.Generator) -> np.ndarray:
        """Homogeneous Poisson process of intensity `lam` restricted to the domain."""
        if not lam > 0:
            raise ValueError("intensity must be positive")
        count = int(rng.poisson(lam * self.area))
        return self.sample_uniform(count, rng)

    def __repr__(self):
        return self.name


@dataclass(repr=False)
class Annulus(Domain):
    r_in: float
    r_out: float

    def __post_init__(self):
        if not (0 <= self.r_in < self.r_out):
            raise ValueError(f"invalid annulus radii ({self.r_in}, {self.r_out})")
        self.name = f"annulus({self.r_in:g},{self.r_out:g})"
        # the hole needs a rolling ball no larger than its radius
        self.r_inner = self.r_in if self.r_in > 0 else self.r_out

    @property
    def area(self):
        return math.pi * (self.r_out ** 2 - self.r_in ** 2)

    @property
    def bbox(self):
        return (-self.r_out, -self.r_out, self.r_out, self.r_out)

    def _contains(self, xy):
        r2 = xy[:, 0] ** 2 + xy[:, 1] ** 2
        return (r2 >= self.r_in ** 2) & (r2 <= self.r_out ** 2)

    def sample_uniform(self, n, rng):
        if n < 0:
            raise ValueError("n must be nonnegative")
        u = rng.uniform(0.0, 1.0, n)
        r = np.sqrt(u * (self.r_out ** 2 - self.r_in ** 2) + self.r_in ** 2)
        t = rng.uniform(0.0, 2.0 * math.pi, n)
        return np.column_stack([r * np.cos(t), r * np.sin(t)])


def disk(radius: float = 1.0) -> Annulus:
    dom = Annulus(0.0, radius)
    dom.name = f"ball({radius:g})"
    return dom


@dataclass(repr=False)
class Ellipse(Domain):
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("ellipse semi-axes must be positive")
        self.name = f"ellipse({self.a:g},{self.b:g})"
        self.r_inner = min(self.a, self.b) ** 2 / max(self.a, self.b)

    @property
    def area(self):
        return math.pi * self.a * self.b

    @property
    def bbox(self):
        return (-self.a, -self.b, self.a, self.b)

    def _contains(self, xy):
        return (xy[:, 0] / self.a) ** 2 + (xy[:, 1] / self.b) ** 2 <= 1.0

    def sample_uniform(self, n, rng):
        if n < 0:
            raise ValueError("n must be nonnegative")
        r = np.sqrt(rng.uniform(0.0, 1.0, n))
        t = rng.uniform(0.0, 2.0 * math.pi, n)
        return np.column_stack([self.a * r * np.cos(t), self.b * r * np.sin(t)])


@dataclass(repr=False)
class NonuniformDisk(Domain):
    """Unit disk sampled with density proportional to a on r <= 1/2 and b on 1/2 < r <= 1."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("density levels must be positive")
        self.name = f"nonuniform_disk(a={self.a:g},b={self.b:g})"
        self.r_inner = 1.0

    @property
    def area(self):
        return math.pi

    @property
    def bbox(self):
        return (-1.0, -1.0, 1.0, 1.0)

    @property
    def inner_mass(self) -> float:
        """P(|X| <= 1/2)."""
        return (self.a / 4.0) / (self.a / 4.0 + 3.0 * self.b / 4.0)

    @property
    def bias_constant(self) -> float:
        """Ratio of the outer-ring density to the uniform density."""
        return self.b / (self.a / 4.0 + 3.0 * self.b / 4.0)

    def _contains(self, xy):
        return xy[:, 0] ** 2 + xy[:, 1] ** 2 <= 1.0

    def sample_uniform(self, n, rng):
        return disk(1.0).sample_uniform(n, rng)

    def sample(self, n, rng):
        if n < 0:
            raise ValueError("n must be nonnegative")
        inner = rng.uniform(0.0, 1.0, n) < self.inner_mass
        u = rng.uniform(0.0, 1.0, n)
        r = np.where(inner, 0.5 * np.sqrt(u), np.sqrt(0.25 + 0.75 * u))
        t = rng.uniform(0.0, 2.0 * math.pi, n)
        return np.column_stack([r * np.cos(t), r * np.sin(t)])


def nonuniform_disk(a: float, b: float) -> NonuniformDisk:
    return NonuniformDisk(a, b)


def cap_area(d: int, t: float) -> float:
    """Volume of the cap of the unit ball in R^d cut at distance 1 - t from the centre."""
    if d < 1 or int(d) != d:
        raise ValueError("dimension must be a positive integer")
    if not (0.0 <= t <= 2.0):
        raise ValueError(f"cap height {t} outside [0, 2]")
    const = math.pi ** ((d - 1) / 2.0) / special.gamma((d + 1) / 2.0)
    upper = math.acos(1.0 - t)
    val, err = integrate.quad(lambda x: math.sin(x) ** d, 0.0, upper, epsabs=1e-13, epsrel=1e-12)
    return const * val


def _segment_area_at_height(radius: float, height: float) -> float:
    """Area of the part of a disk beyond a chord at distance radius - height from the centre."""
    height = min(max(height, 0.0), 2.0 * radius)
    if height > radius:
        return math.pi * radius ** 2 - _segment_area_at_height(radius, 2.0 * radius - height)
    dist = radius - height
    chord = 2.0 * math.sqrt(max(radius ** 2 - dist ** 2, 0.0))
    return circular_segment_area(radius, chord)


@dataclass(repr=False)
class DentWorld(Domain):
    """Ball B(0, r0) with smooth dents Q_j rolled by a ball of radius r.

    Dent j lives in direction u_j; omega[j] switches it on. Dent directions
    are equally spaced, and their chord distance on the sphere of radius r0
    must exceed 2 * eps.
    """

    r0: float
    r: float
    eps: float
    omega: tuple[int, ...] = (1,)
    phase: float = 0.0
    directions: np.ndarray = field(init=False)
    _eta_cache: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        r0, r, eps = self.r0, self.r, self.eps
        if not (r0 > 0 and r >= 0 and eps > 0):
            raise ValueError("r0, eps must be positive and r nonnegative")
        if not r0 > 2.0 * r:
            raise ValueError("need r0 > 2 r")
        if not self.h < r0 - r:
            raise ValueError("eps too large: dent depth exceeds r0 - r")
        if eps >= r0 * math.sqrt(2.0):
            raise ValueError("eps too large for the cap construction")
        self.omega = tuple(int(bool(w)) for w in self.omega)
        k = len(self.omega)
        if k == 0:
            raise ValueError("omega must have at least one entry")
        ang = self.phase + 2.0 * math.pi * np.arange(k) / k
        self.directions = np.column_stack([np.cos(ang), np.sin(ang)])
        if k > 1:
            chord = 2.0 * r0 * math.sin(math.pi / k)
            if not chord > 2.0 * eps:
                raise ValueError(f"{k} dents violate the packing condition (chord {chord:.4g} <= 2 eps)")
        self.name = (f"dent_world(r0={r0:g},r={r:g},eps={eps:g},dents={k},"
                     f"omega={''.join(map(str, self.omega))})")
        self.r_inner = r if r > 0 else None

    @staticmethod
    def max_dents(r0: float, eps: float) -> int:
        k = 1
        while 2.0 * r0 * math.sin(math.pi / (k + 1)) > 2.0 * eps:
            k += 1
        return k

    @property
    def theta(self) -> float:
        return math.acos(1.0 - self.eps ** 2 / (2.0 * self.r0 ** 2))

    @property
    def h(self) -> float:
        return (self.r0 - self.r) * self.eps ** 2 / (2.0 * self.r0 ** 2)

    @property
    def h_plane(self) -> float:
        """Distance from the origin to the plane H_j through the packing circle."""
        return self.r0 - self.eps ** 2 / (2.0 * self.r0)

    @property
    def k_plane(self) -> float:
        """Distance from the origin to the cutting plane K_j."""
        return self.r0 - self.h

    @property
    def n_active(self) -> int:
        return int(sum(self.omega))

    @property
    def bbox(self):
        return (-self.r0, -self.r0, self.r0, self.r0)

    def dent_distance(self, xy: np.ndarray, j: int) -> np.ndarray:
        """Distance from points to the eroded body B(0, r0 - r) intersected with {<x, u_j> <= r0 - h - r}."""
        u = self.directions[j]
        R = self.r0 - self.r
        c = self.r0 - self.h - self.r
        # rotate so that u is the first axis
        p1 = xy[:, 0] * u[0] + xy[:, 1] * u[1]
        p2 = -xy[:, 0] * u[1] + xy[:, 1] * u[0]
        rad = np.hypot(p1, p2)
        shrink = np.where(rad > R, R / np.where(rad > 0, rad, 1.0), 1.0)
        q1 = p1 * shrink
        d_disk = np.maximum(rad - R, 0.0)
        ok_disk = q1 <= c
        d_plane = np.maximum(p1 - c, 0.0)
        ok_plane = np.abs(p2) <= math.sqrt(R * R - c * c)
        corner = math.sqrt(R * R - c * c)
        d_corner = np.hypot(p1 - c, np.abs(p2) - corner)
        return np.where(ok_disk, d_disk, np.where(ok_plane & (p1 >= c), d_plane, d_corner))

    def _contains(self, xy):
        inside = xy[:, 0] ** 2 + xy[:, 1] ** 2 <= self.r0 ** 2
        for j, w in enumerate(self.omega):
            if w:
                inside &= self.dent_distance(xy, j) <= self.r + 1e-12
        return inside

    def eta(self, quadrature_tol: float = 1e-6) -> float:
        key = float(quadrature_tol)
        if key not in self._eta_cache:
            self._eta_cache[key] = dent_eta(self, quadrature_tol)
        return self._eta_cache[key]

    @property
    def area(self) -> float:
        if self.n_active == 0:
            return math.pi * self.r0 ** 2
        return math.pi * self.r0 ** 2 - self.n_active * self.eta()

    def cap_bounds(self) -> tuple[float, float]:
        """(area beyond K_j, area beyond H_j): the two caps that bracket eta."""
        cap_k = _segment_area_at_height(self.r0, self.r0 - self.k_plane)
        cap_h = _segment_area_at_height(self.r0, self.r0 - self.h_plane)
        return cap_k, cap_h


def dent_eta(world: DentWorld, quadrature_tol: float = 1e-6) -> float:
    """Area removed by one dent, by adaptive quadrature over slices across the dent axis.

    Slices at abscissa s (along u_j) lose the part of the disk chord not covered by
    the rolled set; that half-width is closed form, the s-integral is adaptive.
    """
    r0, r = world.r0, world.r
    R = r0 - r
    c = r0 - world.h - r
    corner = math.sqrt(R * R - c * c)
    s_arc = c + r * c / R  # rolled boundary leaves the sphere here

    def lost(s):
        disk_half = math.sqrt(max(r0 * r0 - s * s, 0.0))
        kept = corner + math.sqrt(max(r * r - (s - c) ** 2, 0.0))
        return 2.0 * max(disk_half - kept, 0.0)

    # beyond c + r nothing is kept: that tail is a plain circular segment
    tail = _segment_area_at_height(r0, r0 - (c + r))
    top = min(c + r, r0)
    if top <= s_arc:
        return tail
    if top - s_arc <= 1e-9 * r0:
        # vanishing roll radius: the sliver is below quadrature resolution
        return tail + (top - s_arc) * lost(0.5 * (top + s_arc))
    val, err = integrate.quad(lost, s_arc, top, epsrel=quadrature_tol, epsabs=1e-15, limit=200)
    if not math.isfinite(val) or err > max(quadrature_tol * abs(val), 1e-13) * 10:
        raise RuntimeError(f"dent quadrature failed to converge (value {val}, error {err})")
    return tail + val


def dent_world(r0: float, r: float, eps: float, omega=None, dents: int | None = None) -> DentWorld:
    if omega is None:
        omega = (1,) * (dents if dents is not None else 1)
    return DentWorld(r0, r, eps, tuple(omega))


def annulus(r_in: float, r_out: float) -> Annulus:
    return Annulus(r_in, r_out)


def ellipse(a: float, b: float) -> Ellipse:
    return Ellipse(a, b)


_SPEC = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")


def parse_domain(spec: str) -> Domain:
    """Build a domain from strings such as ``annulus(0.25,1)`` or ``dent_world(r0=3,r=1.2,eps=0.5,dents=4)``."""
    m = _SPEC.match(spec)
    if not m:
        raise ValueError(f"cannot parse domain spec {spec!r}")
    kind, body = m.group(1), m.group(2)
    args: list[float] = []
    kwargs: dict[str, str] = {}
    for tok in filter(None, (t.strip() for t in body.split(","))):
        if "=" in tok:
            k, v = (s.strip() for s in tok.split("=", 1))
            kwargs[k] = v
        else:
            args.append(float(tok))
    fk = {k: float(v) for k, v in kwargs.items() if k not in ("omega", "dents")}
    if kind == "annulus":
        return Annulus(*args, **{k: fk[k] for k in fk})
    if kind == "ellipse":
        return Ellipse(*args, **fk)
    if kind in ("ball", "disk"):
        return disk(*args, **{("radius" if k in ("r", "radius") else k): v for k, v in fk.items()})
    if kind == "nonuniform_disk":
        return NonuniformDisk(*args, **fk)
    if kind == "dent_world":
        omega = None
        if "omega" in kwargs:
            omega = tuple(int(ch) for ch in kwargs["omega"] if ch in "01")
        dents = int(kwargs["dents"]) if "dents" in kwargs else None
        params = dict(zip(("r0", "r", "eps"), args))
        params.update(fk)
        return dent_world(params["r0"], params["r"], params["eps"], omega=omega, dents=dents)
    raise ValueError(f"unknown domain kind {kind!r}")
