"""Coalescing fractional Brownian particle systems.

Particles start at the integers {-k..k}, each following an independently
sampled fBM path with unit time steps.  After every synchronous step,
adjacent particles that crossed or touched are merged under the configured
rule, and the survivor carries the union of the absorbed start interval.
Running for n steps yields the monotone map from start positions to final
positions.

Merge rules:

* coin-flip: a fair coin picks the survivor, which keeps its own path.
* Polya-urn(alpha): the left particle survives with probability
  w_l^alpha / (w_l^alpha + w_r^alpha); alpha = 0 reduces to coin-flip and
  alpha = inf lets the heavier particle win (ties by fair coin).
* regenerate: both paths are dropped and a fresh particle with a newly
  sampled path of the remaining length spawns at the collision point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fgn import FgnPlan, build_plan, sample_fgn_batch
from .fields import MonotoneMap

__all__ = [
    "CoalescenceRule",
    "COIN_FLIP",
    "REGENERATE",
    "polya_urn",
    "SystemConfig",
    "Particle",
    "ParticleSystem",
    "default_start_half_width",
    "init_system",
    "step",
    "resolve_collisions",
    "run",
    "run_system",
]

_RULE_KINDS = ("coinflip", "polya", "regenerate")
_SPAWN_CONVENTIONS = ("midpoint", "left", "right")


@dataclass(frozen=True)
class CoalescenceRule:
    """Merge rule: "coinflip", "regenerate", or "polya" with index ``alpha >= 0``."""

    kind: str
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in _RULE_KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if not (self.alpha >= 0.0):  # rejects NaN too; +inf is legal
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    def label(self) -> str:
        if self.kind == "coinflip":
            return "coin-flip"
        if self.kind == "regenerate":
            return "regenerate"
        return f"alpha={'inf' if math.isinf(self.alpha) else f'{self.alpha:g}'}"


COIN_FLIP = CoalescenceRule("coinflip")
REGENERATE = CoalescenceRule("regenerate")


def polya_urn(alpha: float) -> CoalescenceRule:
    return CoalescenceRule("polya", float(alpha))


def left_win_probability(w_left: float, w_right: float, rule: CoalescenceRule) -> float:
    """Probability that the left particle absorbs the right one."""
    if rule.kind != "polya":
        return 0.5
    # 1 / (1 + (w_r/w_l)^alpha) equals w_l^a / (w_l^a + w_r^a) and stays
    # finite for large alpha; IEEE powers give the right alpha = inf limits
    # (ratio > 1 -> 0, ratio < 1 -> 1, ratio = 1 -> 1/2).
    return 1.0 / (1.0 + (w_right / w_left) ** rule.alpha)


def default_start_half_width(n: int) -> int:
    """Half-width k = 20 * round(n^{2/3}) of the default start set {-k..k}."""
    return 20 * round(float(n) ** (2.0 / 3.0))


@dataclass(frozen=True)
class SystemConfig:
    """Run parameters: horizon, Hurst index, start half-width, rule, seed."""

    n: int
    h: float
    k: int | None = None
    rule: CoalescenceRule = COIN_FLIP
    seed: int = 0
    spawn: str = "midpoint"  # regenerate spawn point: midpoint | left | right

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not 0.0 < self.h < 1.0:
            raise ValueError(f"Hurst index must lie in (0, 1), got {self.h}")
        if self.spawn not in _SPAWN_CONVENTIONS:
            raise ValueError(f"unknown spawn convention {self.spawn!r}")
        if self.k is None:
            object.__setattr__(self, "k", default_start_half_width(self.n))
        if self.k < 1:
            raise ValueError(f"start half-width k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class Particle:
    """Read-only view of one live particle."""

    id: int
    start_lo: int  # leftmost absorbed start position
    start_hi: int  # rightmost absorbed start position
    weight: int
    position: float
    path_cursor: int


class ParticleSystem:
    """Mutable state of one coalescing run.

    Live particles are kept sorted by position in parallel arrays; ``row``
    maps each to its column in the step-major increment matrix ``inc``.
    A regenerated particle reuses the column of one of the colliding pair,
    with fresh increments written over the unconsumed tail.
    """

    def __init__(self, cfg: SystemConfig, inc: np.ndarray, rng):
        count = 2 * cfg.k + 1
        if inc.shape != (cfg.n, count):
            raise ValueError(f"increment matrix must be {(cfg.n, count)}, got {inc.shape}")
        self.cfg = cfg
        self.rng = rng
        self.inc = inc  # (n, count): step-major so each advance reads one row
        self.t = 0
        self.pos = np.arange(-cfg.k, cfg.k + 1, dtype=float)
        self.wgt = np.ones(count, dtype=np.int64)
        self.lo = np.arange(count, dtype=np.int64)  # absorbed start-index interval
        self.hi = np.arange(count, dtype=np.int64)
        self.row = np.arange(count, dtype=np.int64)
        self.live_history = [count]
        self._plans: dict[int, FgnPlan] = {}

    @property
    def live_count(self) -> int:
        return self.pos.size

    def particles(self) -> list[Particle]:
        k = self.cfg.k
        return [
            Particle(
                id=int(self.row[i]),
                start_lo=int(self.lo[i]) - k,
                start_hi=int(self.hi[i]) - k,
                weight=int(self.wgt[i]),
                position=float(self.pos[i]),
                path_cursor=self.t,
            )
            for i in range(self.live_count)
        ]

    def step(self, rng=None) -> None:
        """Advance every particle by its next increment, then resolve collisions."""
        if self.t >= self.cfg.n:
            raise ValueError(f"horizon n={self.cfg.n} already reached")
        self.pos += self.inc[self.t, self.row]
        self.t += 1
        self.resolve_collisions(rng)
        self.live_history.append(self.live_count)

    def resolve_collisions(self, rng=None) -> None:
        """Merge adjacent pairs with pos_left >= pos_right until strictly ordered.

        Violating pairs are found vectorized and handled left to right; a
        merge is rechecked against the survivor's new right neighbour so
        chains collapse within the pass.  Passes repeat until none violate
        (a survivor can still undercut its left neighbour).
        """
        rng = self.rng if rng is None else rng
        count = self.live_count
        if count < 2:
            return
        sites = np.nonzero(self.pos[:-1] >= self.pos[1:])[0]
        if sites.size == 0:
            return
        pos, wgt = self.pos, self.wgt
        nxt = list(range(1, count + 1))
        prv = list(range(-1, count - 1))
        alive = np.ones(count, dtype=bool)
        while True:
            for i in sites:
                if not alive[i]:
                    continue
                while True:
                    j = nxt[i]
                    if j >= count or pos[i] < pos[j]:
                        break
                    survivor = self._merge(i, j, rng)
                    dead = j if survivor == i else i
                    alive[dead] = False
                    if dead == j:
                        nxt[i] = nxt[j]
                        if nxt[j] < count:
                            prv[nxt[j]] = i
                    else:
                        p = prv[i]
                        prv[j] = p
                        if p >= 0:
                            nxt[p] = j
                    i = survivor
            live = np.nonzero(alive)[0]
            live_pos = pos[live]
            bad = np.nonzero(live_pos[:-1] >= live_pos[1:])[0]
            if bad.size == 0:
                break
            sites = live[bad]
        self.pos = pos[alive]
        self.wgt = wgt[alive]
        self.lo = self.lo[alive]
        self.hi = self.hi[alive]
        self.row = self.row[alive]

    def _merge(self, i: int, j: int, rng) -> int:
        """Merge the colliding adjacent pair (i left, j right); return the survivor index."""
        rule = self.cfg.rule
        if rule.kind == "regenerate":
            spawn = self.cfg.spawn
            if spawn == "midpoint":
                here = 0.5 * (self.pos[i] + self.pos[j])
            elif spawn == "left":
                here = self.pos[i]
            else:
                here = self.pos[j]
            remaining = self.cfg.n - self.t
            if remaining > 0:
                self.inc[self.t:, self.row[i]] = self._fresh_increments(remaining, rng)
            self.pos[i] = here
            self.wgt[i] += self.wgt[j]
            self.hi[i] = self.hi[j]
            return i
        p_left = left_win_probability(float(self.wgt[i]), float(self.wgt[j]), rule)
        survivor, absorbed = (i, j) if rng.random() < p_left else (j, i)
        self.wgt[survivor] += self.wgt[absorbed]
        self.lo[survivor] = self.lo[i]
        self.hi[survivor] = self.hi[j]
        return survivor

    def _fresh_increments(self, length: int, rng) -> np.ndarray:
        padded = 1 << (length - 1).bit_length()
        plan = self._plans.get(padded)
        if plan is None:
            plan = build_plan(padded, self.cfg.h)
            self._plans[padded] = plan
        return sample_fgn_batch(plan, 1, rng)[0, :length]

    def monotone_map(self) -> MonotoneMap:
        """Map each start position to the final position of its absorbing particle."""
        k = self.cfg.k
        ends = np.empty(2 * k + 1)
        for i in range(self.live_count):
            ends[self.lo[i]: self.hi[i] + 1] = self.pos[i]
        starts = np.arange(-k, k + 1, dtype=float)
        return MonotoneMap(starts=starts, ends=ends, n=self.cfg.n)


def init_system(cfg: SystemConfig, rng=None) -> ParticleSystem:
    """Build the initial system: 2k+1 unit-weight particles with fresh paths."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    count = 2 * cfg.k + 1
    if cfg.n == 0:
        inc = np.zeros((0, count))
    else:
        plan = build_plan(cfg.n, cfg.h)
        inc = np.ascontiguousarray(sample_fgn_batch(plan, count, rng).T)
    return ParticleSystem(cfg, inc, rng)


def step(system: ParticleSystem, rng=None) -> ParticleSystem:
    system.step(rng)
    return system


def resolve_collisions(system: ParticleSystem, rng=None) -> ParticleSystem:
    system.resolve_collisions(rng)
    return system


def run_system(cfg: SystemConfig, rng=None) -> ParticleSystem:
    """Run the full horizon and return the final system state."""
    system = init_system(cfg, rng)
    for _ in range(cfg.n):
        system.step()
    return system


def run(cfg: SystemConfig, rng=None) -> MonotoneMap:
    """Run the full horizon and return the start -> end monotone map."""
    return run_system(cfg, rng).monotone_map()
