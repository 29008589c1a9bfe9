"""Point fields extracted from monotone coalescence maps.

A run of either model yields a monotone map from start positions to final
positions.  The distinct final positions form the upper point field; the
boundaries between basins of starts that share a final position form the
lower point field.  Fields are trimmed at both ends to drop finite-size
artifacts and rescaled by n^{2/3} into the common comparison frame.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "DegenerateMapError",
    "TooFewPointsError",
    "AlreadyRescaledError",
    "MonotoneMap",
    "PointField",
    "upper_field",
    "lower_field",
    "trim",
    "rescale",
]


class DegenerateMapError(ValueError):
    """The map has too few distinct ends to define a point field."""


class TooFewPointsError(ValueError):
    """Trimming would remove every point of the field."""


class AlreadyRescaledError(ValueError):
    """The field has already been rescaled."""


@dataclass(frozen=True)
class MonotoneMap:
    """Map from start positions to end positions, sorted by start.

    ``starts`` must be strictly increasing and ``ends`` non-decreasing;
    ``n`` is the time horizon of the run that produced the map.
    """

    starts: np.ndarray
    ends: np.ndarray
    n: int

    def __post_init__(self):
        if self.starts.shape != self.ends.shape or self.starts.ndim != 1:
            raise ValueError("starts and ends must be 1-d arrays of equal length")
        if self.starts.size >= 2:
            if not np.all(np.diff(self.starts) > 0):
                raise ValueError("starts must be strictly increasing")
            if not np.all(np.diff(self.ends) >= 0):
                raise ValueError("ends must be non-decreasing")

    def __len__(self) -> int:
        return self.starts.size


@dataclass(frozen=True)
class PointField:
    """Sorted positions of an upper or lower point field."""

    positions: np.ndarray
    kind: str  # "upper" | "lower"
    n: int
    rescaled: bool = False

    def __post_init__(self):
        if self.kind not in ("upper", "lower"):
            raise ValueError(f"kind must be 'upper' or 'lower', got {self.kind!r}")
        if self.positions.size >= 2 and not np.all(np.diff(self.positions) > 0):
            raise ValueError("positions must be strictly increasing")

    def __len__(self) -> int:
        return self.positions.size


def upper_field(mm: MonotoneMap) -> PointField:
    """Distinct end positions of the map."""
    positions = np.unique(mm.ends)
    if positions.size < 2:
        raise DegenerateMapError(
            f"need at least 2 distinct ends to form gaps, got {positions.size}"
        )
    return PointField(positions=positions, kind="upper", n=mm.n)


def lower_field(mm: MonotoneMap, placement: str = "midpoint") -> PointField:
    """Basin boundaries: one point between each adjacent start pair whose ends differ.

    ``placement`` picks the sub-lattice convention: "midpoint" of the two
    starts, or "last_start" (the left start of the pair).
    """
    if placement not in ("midpoint", "last_start"):
        raise ValueError(f"unknown placement {placement!r}")
    differs = mm.ends[1:] != mm.ends[:-1]
    if not np.any(differs):
        raise DegenerateMapError("map has no basin boundaries")
    if placement == "midpoint":
        positions = 0.5 * (mm.starts[:-1][differs] + mm.starts[1:][differs])
    else:
        positions = mm.starts[:-1][differs].astype(float)
    return PointField(positions=positions, kind="lower", n=mm.n)


def trim(field: PointField, per_end: int = 2) -> PointField:
    """Remove ``per_end`` points from each end of the field."""
    per_end = int(per_end)
    if per_end < 0:
        raise ValueError("per_end must be nonnegative")
    if per_end == 0:
        return field
    if len(field) <= 2 * per_end:
        raise TooFewPointsError(
            f"cannot trim {per_end} points per end from a field of {len(field)}"
        )
    return replace(field, positions=field.positions[per_end:-per_end])


def rescale_factor(n: int) -> float:
    """Spatial normalization n^{2/3} of a horizon-``n`` run."""
    return float(n) ** (2.0 / 3.0) if n > 1 else 1.0


def rescale(field: PointField) -> PointField:
    """Divide positions by n^{2/3}; may be applied once per field."""
    if field.rescaled:
        raise AlreadyRescaledError("field is already rescaled")
    return replace(field, positions=field.positions / rescale_factor(field.n), rescaled=True)
