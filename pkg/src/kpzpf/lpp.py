"""Exponential corner-growth last-passage percolation.

Independent Exp(1) weights sit on the lattice square {0..n} x {0..n}; the
last-passage time g(p) is the maximal weight sum over up-right paths from
the origin to p.  Under the stationary boundary, axis weights are
Exp(1-rho) on the x-axis, Exp(rho) on the y-axis, and 0 at the corner.

The recurrence g(p) = w(p) + max(g(left), g(below)) is swept one
anti-diagonal at a time: both predecessors of a point on anti-diagonal t
lie on t-1, so each sweep is a vectorized shifted maximum.  Only two
diagonals are held at once; argmax choices are kept as one bit per lattice
point for backtracking.

Geodesics are traced backward from the anti-diagonal x + y = n by following
the recorded argmax directions until an axis is reached; the first axis
point hit is the geodesic's root.  Traced prefixes are memoized, so the
whole root map costs the size of the geodesic forest, not n^2.

Spatial statistics use the rotated frame t = x + y, s = x - y.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .fields import MonotoneMap

__all__ = [
    "StationaryBoundary",
    "LppConfig",
    "PassageField",
    "GeodesicForest",
    "fill_passage",
    "backtrack_forest",
    "lpp_monotone_map",
]

_DENSE_LIMIT = 128  # keep full g and w matrices for horizons up to this


@dataclass(frozen=True)
class StationaryBoundary:
    """Stationary boundary weights: Exp(1-rho) on the x-axis, Exp(rho) on the y-axis."""

    rho: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")


@dataclass(frozen=True)
class LppConfig:
    """Lattice horizon, boundary condition (None for plain Exp(1) axes), seed."""

    n: int
    boundary: StationaryBoundary | None = StationaryBoundary(0.5)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass
class PassageField:
    """Last-passage times and argmax directions over the filled anti-diagonals.

    ``terminal`` holds g on the anti-diagonal x + y = n, indexed by x.
    Direction bits (1 = vertical predecessor) are packed per diagonal.
    Dense g and w matrices (indexed [y][x]) are retained for small lattices.
    """

    n: int
    boundary: StationaryBoundary | None
    terminal: np.ndarray
    max_diag: int
    g_dense: np.ndarray | None = None
    w_dense: np.ndarray | None = None
    _dirs: list = dataclass_field(default_factory=list, repr=False)

    def diag_range(self, t: int) -> tuple[int, int]:
        """Inclusive x-range of lattice points on anti-diagonal t."""
        return max(0, t - self.n), min(t, self.n)

    def direction_is_vertical(self, t: int, x: int) -> bool:
        """True if the geodesic into (x, t - x) arrives from below, i.e. from (x, t-x-1)."""
        idx = x - max(0, t - self.n)
        packed = self._dirs[t]
        return bool((packed[idx >> 3] >> (7 - (idx & 7))) & 1)

    def g(self, x: int, y: int) -> float:
        if self.g_dense is None:
            raise ValueError("dense passage times were not stored for this field")
        return float(self.g_dense[y, x])


def _diagonal_weights(cfg: LppConfig, t: int, rng, weights: np.ndarray | None) -> np.ndarray:
    lo_x, hi_x = max(0, t - cfg.n), min(t, cfg.n)
    if weights is not None:
        xs = np.arange(lo_x, hi_x + 1)
        return np.asarray(weights, dtype=float)[t - xs, xs]
    w = rng.exponential(1.0, hi_x - lo_x + 1)
    b = cfg.boundary
    if b is not None:
        if t == 0:
            w[0] = 0.0
        else:
            if lo_x == 0:  # on the y-axis: Exp(rho)
                w[0] /= b.rho
            if hi_x == t:  # on the x-axis: Exp(1-rho)
                w[-1] /= 1.0 - b.rho
    return w


def fill_passage(
    cfg: LppConfig,
    rng=None,
    weights: np.ndarray | None = None,
    store_dense: bool | None = None,
    max_diag: int | None = None,
) -> PassageField:
    """Compute last-passage times by an anti-diagonal sweep.

    ``weights`` may give the full (n+1, n+1) weight matrix (indexed [y][x],
    boundary included) instead of sampling; ``max_diag`` stops the sweep
    early (it must reach at least the terminal anti-diagonal t = n).
    """
    n = cfg.n
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if max_diag is None:
        max_diag = 2 * n
    if not n <= max_diag <= 2 * n:
        raise ValueError(f"max_diag must lie in [n, 2n], got {max_diag}")
    if store_dense is None:
        store_dense = weights is not None or n <= _DENSE_LIMIT
    if store_dense and max_diag < 2 * n:
        raise ValueError("dense storage requires filling the full square")

    g_dense = np.full((n + 1, n + 1), np.nan) if store_dense else None
    w_dense = np.full((n + 1, n + 1), np.nan) if store_dense else None
    dirs: list = [None]
    terminal = None
    prev = None
    for t in range(max_diag + 1):
        w = _diagonal_weights(cfg, t, rng, weights)
        if t == 0:
            cur = w.copy()
        else:
            if t <= n:
                vert = np.append(prev, -np.inf)  # missing above x = t (y would be -1)
                horz = np.concatenate(([-np.inf], prev))  # missing at x = 0
            else:
                vert = prev[1:]
                horz = prev[:-1]
            from_vertical = vert >= horz  # ties prefer the vertical predecessor
            cur = w + np.maximum(vert, horz)
            dirs.append(np.packbits(from_vertical))
        if t == n:
            terminal = cur.copy()
        if store_dense:
            lo_x, hi_x = max(0, t - n), min(t, n)
            xs = np.arange(lo_x, hi_x + 1)
            g_dense[t - xs, xs] = cur
            w_dense[t - xs, xs] = w
        prev = cur
    return PassageField(
        n=n,
        boundary=cfg.boundary,
        terminal=terminal,
        max_diag=max_diag,
        g_dense=g_dense,
        w_dense=w_dense,
        _dirs=dirs,
    )


@dataclass
class GeodesicForest:
    """Roots of the geodesics traced back from the terminal anti-diagonal.

    ``roots_s[x]`` is the rotated coordinate s = x - y of the root of the
    geodesic ending at terminal point (x, n - x); ``root_points`` holds the
    roots as (t, x) pairs.
    """

    n: int
    roots_s: np.ndarray
    root_points: list
    field: PassageField

    def path(self, x_terminal: int) -> list[tuple[int, int]]:
        """Backtracked geodesic as (x, y) points, terminal first, root last."""
        t, x = self.n, x_terminal
        points = [(x, t - x)]
        while x != 0 and x != t:
            if not self.field.direction_is_vertical(t, x):
                x -= 1
            t -= 1
            points.append((x, t - x))
        return points


def backtrack_forest(field: PassageField) -> GeodesicForest:
    """Trace every terminal point to its root on an axis, sharing merged tails."""
    n = field.n
    memo: dict = {}
    roots_s = np.empty(n + 1)
    root_points = []
    for x0 in range(n + 1):
        t, x = n, x0
        trail = []
        while True:
            if x == 0 or x == t:  # reached an axis point: this is the root
                root = (t, x)
                break
            found = memo.get((t, x))
            if found is not None:
                root = found
                break
            trail.append((t, x))
            if not field.direction_is_vertical(t, x):
                x -= 1
            t -= 1
        for key in trail:
            memo[key] = root
        rt, rx = root
        roots_s[x0] = 2 * rx - rt
        root_points.append(root)
    return GeodesicForest(n=n, roots_s=roots_s, root_points=root_points, field=field)


def lpp_monotone_map(cfg: LppConfig, rng=None) -> MonotoneMap:
    """Map terminal anti-diagonal points to their geodesic roots, in s = x - y.

    Geodesics are traced backward in time, so the map runs from the terminal
    line back to the axes; its distinct ends are the coalesced root set.
    """
    field = fill_passage(cfg, rng, store_dense=False, max_diag=cfg.n)
    forest = backtrack_forest(field)
    starts = (2.0 * np.arange(cfg.n + 1) - cfg.n).astype(float)
    return MonotoneMap(starts=starts, ends=forest.roots_s, n=cfg.n)
