"""Volume estimators built on the alpha-convex hull, and their confidence intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .geom import as_array, convex_hull, polygon_area
from .hull import AlphaHull, AreaEstimate


@dataclass(frozen=True)
class SplitResult:
    """Outcome of one sample split.

    `mu_hat_s` is the certified-area midpoint of the hull of the first
    subsample; `mu_bounds` carries its certified (lower, upper).
    `outside` is the number of second-subsample points that fall outside it.
    """

    v_hat: float
    mu_hat_s: float
    p_hat: float
    m: int
    n: int
    alpha: float
    clamped: bool
    outside: int
    mu_bounds: tuple[float, float]

    @property
    def trials(self) -> int:
        return self.n - self.m


@dataclass(frozen=True)
class VolumeInterval:
    lower: float
    upper: float
    level: float
    estimate: float

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def plug_in(sample, alpha: float, tolerance: float | None = None) -> AreaEstimate:
    """Area of the alpha-convex hull of the whole sample."""
    return AlphaHull(sample, alpha).area(tolerance)


def corrected_volume(mu_hat_s: float, p: float) -> float:
    """mu / max(1 - p, 1/2); nondecreasing in p."""
    return mu_hat_s / max(1.0 - p, 0.5)


def split_estimate(sample, alpha: float, m: int, tolerance: float | None = None,
                   rng: np.random.Generator | None = None) -> SplitResult:
    """Sample-splitting estimator.

    The hull of a random subsample of size m estimates the set; the share of
    the remaining n - m points falling outside that hull corrects its area.
    """
    pts = as_array(sample)
    n = len(pts)
    if n < 2:
        raise ValueError("need at least two sample points")
    if not (1 <= m <= n - 1):
        raise ValueError(f"m={m} outside [1, n-1] for n={n}")
    if rng is None:
        rng = np.random.default_rng()
    perm = rng.permutation(n)
    first, second = pts[perm[:m]], pts[perm[m:]]
    hull = AlphaHull(first, alpha)
    est = hull.area(tolerance)
    outside = int(np.count_nonzero(~hull.contains_many(second)))
    p_hat = outside / (n - m)
    return SplitResult(
        v_hat=corrected_volume(est.value, p_hat),
        mu_hat_s=est.value,
        p_hat=p_hat,
        m=m,
        n=n,
        alpha=float(alpha),
        clamped=p_hat > 0.5,
        outside=outside,
        mu_bounds=(est.lower, est.upper),
    )


def bagged_estimate(sample, alpha: float, m: int, b: int, tolerance: float | None = None,
                    rng: np.random.Generator | None = None) -> float:
    """Average of b split estimates over independent random splits of the same sample."""
    if b < 1:
        raise ValueError("b must be at least 1")
    if rng is None:
        rng = np.random.default_rng()
    vals = [split_estimate(sample, alpha, m, tolerance, rng).v_hat for _ in range(b)]
    return math.fsum(vals) / b


def wilson_interval(k: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion, clipped to [0, 1]."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not (0 <= k <= trials):
        raise ValueError(f"k={k} outside [0, {trials}]")
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0, 1)")
    z = float(norm.ppf(0.5 + level / 2.0))
    p = k / trials
    z2n = z * z / trials
    centre = (p + z2n / 2.0) / (1.0 + z2n)
    half = (z / (1.0 + z2n)) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == trials else min(1.0, centre + half)
    return lo, hi


def volume_ci(split: SplitResult, level: float = 0.95) -> VolumeInterval:
    """Map the Wilson interval for the outside share through mu / max(1 - p, 1/2)."""
    p_lo, p_hi = wilson_interval(split.outside, split.trials, level)
    lo = corrected_volume(split.mu_hat_s, p_lo)
    hi = corrected_volume(split.mu_hat_s, p_hi)
    return VolumeInterval(min(lo, split.v_hat), max(hi, split.v_hat), level, split.v_hat)


def convex_hull_area(sample) -> float:
    """Area of the convex hull of the sample (the |C| baseline)."""
    pts = as_array(sample)
    if len(pts) == 0:
        return 0.0
    return polygon_area(convex_hull(pts))


def naive_oracle(count: int, intensity: float) -> float:
    """N / lambda for a Poisson sample of size N."""
    return count / intensity
