"""Independent reference computations used only by the tests.

None of these share code with the package's kernels: they work on a dense
raster of candidate ball centres and answer through a KD-tree.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree


class BruteHull:
    """Empty-disk-centre search on a grid of step <= alpha / 200.

    A query x is outside the hull iff some grid node y has |y - x| < alpha and
    min_i |y - X_i| >= alpha. Only free nodes bordering non-free ones can be
    nearest to a non-free query, so the search runs over those.
    """

    def __init__(self, pts, alpha: float, window, step: float | None = None):
        self.pts = np.asarray(pts, dtype=float)
        self.alpha = float(alpha)
        self.step = step or alpha / 200.0
        x0, y0, x1, y1 = window
        # free nodes farther than alpha from every query in the window are irrelevant
        pad = 1.05 * alpha + 2 * self.step
        xs = np.arange(x0 - pad, x1 + pad + self.step, self.step)
        ys = np.arange(y0 - pad, y1 + pad + self.step, self.step)
        d2 = np.full((len(xs), len(ys)), np.inf)
        for px, py in self.pts:
            dx2 = (xs - px) ** 2
            dy2 = (ys - py) ** 2
            np.minimum(d2, dx2[:, None] + dy2[None, :], out=d2)
        free = d2 >= alpha * alpha
        border = np.zeros_like(free)
        # grid edge counts as border: free region continues outside
        border[0, :] = border[-1, :] = border[:, 0] = border[:, -1] = True
        nf = ~free
        border[1:, :] |= nf[:-1, :]
        border[:-1, :] |= nf[1:, :]
        border[:, 1:] |= nf[:, :-1]
        border[:, :-1] |= nf[:, 1:]
        sel = free & border
        ii, jj = np.nonzero(sel)
        nodes = np.column_stack([xs[ii], ys[jj]])
        self.tree = cKDTree(nodes) if len(nodes) else None

    def free_distance(self, q) -> np.ndarray:
        """Distance from each query to the nearest free grid node (within the window)."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        near = np.sqrt(((q[:, None, :] - self.pts[None, :, :]) ** 2).sum(-1)).min(axis=1)
        out = np.zeros(len(q))
        busy = near < self.alpha
        if busy.any() and self.tree is not None:
            out[busy] = self.tree.query(q[busy])[0]
        elif busy.any():
            out[busy] = np.inf
        return out

    def contains(self, q) -> np.ndarray:
        return self.free_distance(q) >= self.alpha


def brute_clearance(pts, alpha: float, x, grid: int = 2000, radius: float | None = None) -> float:
    """min |x - y| over a grid x grid lattice of candidate centres y with dist(y, sample) >= alpha."""
    pts = np.asarray(pts, dtype=float)
    x = np.asarray(x, dtype=float)
    if radius is None:
        radius = float(np.abs(pts - x).max()) + 2 * alpha
    ax = np.linspace(x[0] - radius, x[0] + radius, grid)
    ay = np.linspace(x[1] - radius, x[1] + radius, grid)
    tree = cKDTree(pts)
    best = math.inf
    for k in range(0, grid, 200):
        gx, gy = np.meshgrid(ax[k:k + 200], ay, indexing="ij")
        y = np.column_stack([gx.ravel(), gy.ravel()])
        d, _ = tree.query(y)
        free = y[d >= alpha]
        if len(free):
            best = min(best, float(np.hypot(*(free - x).T).min()))
    return best


def mc_area(contains_many, bbox, n: int, rng) -> tuple[float, float]:
    """Plain Monte Carlo area over a box: (estimate, standard error)."""
    x0, y0, x1, y1 = bbox
    box = (x1 - x0) * (y1 - y0)
    q = np.column_stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)])
    f = float(np.mean(contains_many(q)))
    return box * f, box * math.sqrt(f * (1 - f) / n)


def wilson_by_inversion(k: int, trials: int, level: float) -> tuple[float, float]:
    """Wilson interval as the set of p whose score statistic is below z, solved with brentq."""
    from scipy.optimize import brentq
    from scipy.stats import norm

    z = norm.ppf(0.5 + level / 2)
    phat = k / trials

    def score(p):
        return (phat - p) ** 2 - z * z * p * (1 - p) / trials

    # score is zero at p = phat itself when phat is 0 or 1, so step off it
    lo = 0.0 if k == 0 else brentq(score, 1e-15, min(phat, 1 - 1e-12))
    hi = 1.0 if k == trials else brentq(score, max(phat, 1e-12), 1 - 1e-15)
    return lo, hi
