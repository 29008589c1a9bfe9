"""Gap statistics of pooled point fields and the two-sample K-S test.

Gaps from many independent replicas are pooled into one flat array with
per-replica offsets, so that windowed statistics never straddle replica
boundaries.  The consecutive-gap statistic divides by the pooled mean; the
jump-k ratio divides each gap by the gap k intervals before it, using all
overlapping windows inside a replica.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EmptyPoolError",
    "EmptySampleError",
    "GapPool",
    "KsResult",
    "delta0",
    "jump_k_ratios",
    "ks_test",
]


class EmptyPoolError(ValueError):
    """The gap pool contains no gaps."""


class EmptySampleError(ValueError):
    """A K-S sample is empty."""


@dataclass(frozen=True)
class GapPool:
    """Consecutive gaps pooled across replicas.

    ``offsets`` has one entry per replica boundary (length replicas + 1),
    so replica r owns gaps[offsets[r]:offsets[r+1]].
    """

    gaps: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        if self.offsets.size < 1 or self.offsets[0] != 0 or self.offsets[-1] != self.gaps.size:
            raise ValueError("offsets must start at 0 and end at len(gaps)")
        if np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets must be non-decreasing")
        if self.gaps.size and not np.all(self.gaps > 0):
            raise ValueError("all gaps must be positive")

    @classmethod
    def from_positions(cls, position_lists) -> "GapPool":
        """Pool np.diff of each replica's sorted positions."""
        chunks = [np.diff(np.asarray(p, dtype=float)) for p in position_lists]
        sizes = np.array([c.size for c in chunks], dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(sizes)))
        gaps = np.concatenate(chunks) if chunks else np.empty(0)
        return cls(gaps=gaps, offsets=offsets)

    @property
    def replica_count(self) -> int:
        return self.offsets.size - 1

    def segments(self):
        for r in range(self.replica_count):
            yield self.gaps[self.offsets[r]: self.offsets[r + 1]]


def delta0(pool: GapPool) -> np.ndarray:
    """Gaps normalized by the pooled sample mean (output mean is 1)."""
    if pool.gaps.size == 0:
        raise EmptyPoolError("cannot normalize an empty gap pool")
    return pool.gaps / pool.gaps.mean()


def jump_k_ratios(pool: GapPool, k: int) -> np.ndarray:
    """Ratios gap[i+k] / gap[i] over all windows within each replica.

    Overlapping windows are all used; windows never cross replica
    boundaries.  Empty if every replica has at most k gaps.
    """
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    parts = [seg[k:] / seg[:-k] for seg in pool.segments() if seg.size > k]
    return np.concatenate(parts) if parts else np.empty(0)


@dataclass(frozen=True)
class KsResult:
    """Two-sample K-S statistic and asymptotic p-value."""

    d: float
    p: float
    n1: int
    n2: int


def _ks_survival(lam: float) -> float:
    """Asymptotic K-S tail probability Q(lam) = 2 sum_j (-1)^{j-1} exp(-2 j^2 lam^2)."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 100_000):
        term = math.exp(-2.0 * (j * lam) ** 2)
        total += sign * term
        if term < 1e-12:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_test(a, b) -> KsResult:
    """Two-sample Kolmogorov-Smirnov test.

    d is the sup distance between the empirical CDFs over the pooled
    values; the p-value uses the asymptotic survival function at
    lam = (sqrt(m) + 0.12 + 0.11/sqrt(m)) * d with m = n1*n2/(n1+n2).
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("both samples must be non-empty")
    n1, n2 = a.size, b.size
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / n1
    cdf_b = np.searchsorted(b, pooled, side="right") / n2
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    m = n1 * n2 / (n1 + n2)
    lam = (math.sqrt(m) + 0.12 + 0.11 / math.sqrt(m)) * d
    return KsResult(d=d, p=_ks_survival(lam), n1=n1, n2=n2)
