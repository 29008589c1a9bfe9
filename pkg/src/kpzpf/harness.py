"""Experiment orchestration: replica batches, data banks, p-value tables.

A run turns an ExperimentSpec into a DataBank: per replica, build the
monotone map (coalescing particles or LPP geodesics), extract both point
fields, trim two points per end, rescale by n^{2/3}, and store the
positions.  Banks serialize to a line-oriented text format (one key=value
header line, one line per record with 17-significant-digit decimals) that
round-trips bit-exactly, so identical specs produce byte-identical files.

Replica r draws its seed from a splitmix64-style hash of (root_seed, r),
which is injective in r, so streams never collide.  Replicas may fan out
over a process pool; records are assembled in replica order regardless of
completion order.  KPZPF_THREADS caps the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import coalesce
from .coalesce import CoalescenceRule, SystemConfig
from .fields import (
    DegenerateMapError,
    PointField,
    TooFewPointsError,
    lower_field,
    rescale,
    trim,
    upper_field,
)
from .lpp import LppConfig, StationaryBoundary, lpp_monotone_map
from .stats import GapPool, delta0, jump_k_ratios, ks_test

__all__ = [
    "ConventionMismatchError",
    "CfbmModel",
    "LppModel",
    "ExperimentSpec",
    "FieldRecord",
    "DataBank",
    "PValueTable",
    "derive_seed",
    "run_experiment",
    "pooled_statistic",
    "compare",
    "symmetry_table",
    "emit_plot_data",
]

_VERSION = "0.1.0"
_MASK64 = (1 << 64) - 1

DESK_SCALE = {"cfbm": (256, 100), "lpp": (256, 100)}
FULL_SCALE = {"cfbm": (1024, 500), "lpp": (4096, 500)}


class ConventionMismatchError(ValueError):
    """Banks under comparison disagree on trimming or placement conventions."""


@dataclass(frozen=True)
class CfbmModel:
    """Coalescing fBM model: merge rule plus Hurst index."""

    rule: CoalescenceRule
    h: float = 2.0 / 3.0

    def label(self) -> str:
        return self.rule.label()


@dataclass(frozen=True)
class LppModel:
    """Corner-growth LPP model with an optional stationary boundary."""

    boundary: StationaryBoundary | None = StationaryBoundary(0.5)

    def label(self) -> str:
        return "LPP"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to regenerate a bank bit-for-bit."""

    model: CfbmModel | LppModel
    n: int
    replicas: int
    root_seed: int
    trim_per_end: int = 2
    lower_placement: str = "midpoint"
    spawn: str = "midpoint"  # regenerate spawn convention (cfBM only)
    k: int | None = None  # start half-width override (cfBM only)
    output_path: str | None = None

    def __post_init__(self):
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")


def derive_seed(root_seed: int, replica: int) -> int:
    """Decorrelated 64-bit seed for one replica (splitmix64 finalizer)."""
    x = (int(root_seed) + (replica + 1) * 0x9E3779B97F4A7C15) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


@dataclass
class FieldRecord:
    """One trimmed, rescaled point field of one replica."""

    replica: int
    kind: str  # "upper" | "lower"
    positions: np.ndarray


@dataclass
class DataBank:
    """Collected point fields plus the metadata that regenerates them."""

    header: dict
    records: list
    survivors: dict
    skipped: list

    def label(self) -> str:
        if self.header["model"] == "lpp":
            return "LPP"
        rule = self.header["rule"]
        if rule == "coinflip":
            return "coin-flip"
        if rule == "regenerate":
            return "regenerate"
        return f"alpha={self.header['alpha']}"

    def positions(self, kind: str) -> list:
        """Per-replica positions of one field kind, in replica order."""
        return [r.positions for r in self.records if r.kind == kind]

    def conventions(self) -> dict:
        keys = ("trim_per_end", "lower_placement", "jump_window")
        return {key: self.header.get(key) for key in keys}

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(_format_header(self.header, self.skipped) + "\n")
            by_replica: dict = {}
            for rec in self.records:
                by_replica.setdefault(rec.replica, []).append(rec)
            for replica in sorted(by_replica):
                for rec in by_replica[replica]:
                    tag = "U" if rec.kind == "upper" else "L"
                    vals = ",".join(f"{v:.17g}" for v in rec.positions)
                    fh.write(f"replica={rec.replica} field={tag} positions={vals}\n")
                if replica in self.survivors:
                    vals = ",".join(str(int(v)) for v in self.survivors[replica])
                    fh.write(f"replica={replica} survivors={vals}\n")

    @classmethod
    def load(cls, path) -> "DataBank":
        with open(path) as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise ValueError(f"empty bank file: {path}")
        header = dict(tok.split("=", 1) for tok in lines[0].split())
        skipped = [int(s) for s in header.pop("skipped", "").split(",") if s]
        records: list = []
        survivors: dict = {}
        for line in lines[1:]:
            if not line.strip():
                continue
            fields = dict(tok.split("=", 1) for tok in line.split())
            replica = int(fields["replica"])
            if "survivors" in fields:
                survivors[replica] = np.array(
                    [int(s) for s in fields["survivors"].split(",")], dtype=np.int64
                )
                continue
            kind = "upper" if fields["field"] == "U" else "lower"
            positions = np.array([float(s) for s in fields["positions"].split(",")])
            records.append(FieldRecord(replica=replica, kind=kind, positions=positions))
        return cls(header=header, records=records, survivors=survivors, skipped=skipped)


def _format_header(header: dict, skipped: list) -> str:
    parts = [f"{key}={value}" for key, value in header.items()]
    parts.append("skipped=" + ",".join(str(r) for r in skipped))
    return " ".join(parts)


def _spec_header(spec: ExperimentSpec) -> dict:
    header = {"format": "kpzpf-bank", "version": _VERSION}
    model = spec.model
    if isinstance(model, CfbmModel):
        cfg = _cfbm_config(spec, 0)
        header.update(
            model="cfbm",
            rule=model.rule.kind,
            alpha="inf" if math.isinf(model.rule.alpha) else f"{model.rule.alpha:g}",
            h=f"{model.h:.17g}",
            n=str(spec.n),
            k=str(cfg.k),
        )
    else:
        header.update(model="lpp", n=str(spec.n))
        if model.boundary is None:
            header["boundary"] = "none"
        else:
            header.update(boundary="stationary", rho=f"{model.boundary.rho:.17g}")
    header.update(
        replicas=str(spec.replicas),
        root_seed=str(spec.root_seed),
        trim_per_end=str(spec.trim_per_end),
        lower_placement=spec.lower_placement,
        spawn=spec.spawn,
        jump_window="overlapping",
    )
    return header


def _cfbm_config(spec: ExperimentSpec, seed: int) -> SystemConfig:
    model = spec.model
    return SystemConfig(
        n=spec.n, h=model.h, k=spec.k, rule=model.rule, seed=seed, spawn=spec.spawn
    )


def _run_replica(spec: ExperimentSpec, replica: int):
    """One replica: map -> both fields -> trim -> rescale.

    Returns (replica, upper, lower, survivors) or (replica, None, None, None)
    when the fields degenerate at this scale.
    """
    seed = derive_seed(spec.root_seed, replica)
    survivors = None
    if isinstance(spec.model, CfbmModel):
        system = coalesce.run_system(_cfbm_config(spec, seed))
        mm = system.monotone_map()
        survivors = np.asarray(system.live_history, dtype=np.int64)
    else:
        mm = lpp_monotone_map(LppConfig(n=spec.n, boundary=spec.model.boundary, seed=seed))
    try:
        upper = rescale(trim(upper_field(mm), spec.trim_per_end))
        lower = rescale(trim(lower_field(mm, spec.lower_placement), spec.trim_per_end))
    except (DegenerateMapError, TooFewPointsError):
        return replica, None, None, None
    return replica, upper.positions, lower.positions, survivors


def _worker_count(workers: int | None, tasks: int) -> int:
    if workers is None:
        workers = os.cpu_count() or 1
    cap = os.environ.get("KPZPF_THREADS")
    if cap:
        workers = min(workers, int(cap))
    return max(1, min(workers, tasks))


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> DataBank:
    """Run all replicas of a spec and assemble the bank (in replica order)."""
    count = _worker_count(workers, spec.replicas)
    if count == 1:
        results = [_run_replica(spec, r) for r in range(spec.replicas)]
    else:
        with ProcessPoolExecutor(max_workers=count) as pool:
            results = list(pool.map(_run_replica, [spec] * spec.replicas, range(spec.replicas)))
    results.sort(key=lambda item: item[0])
    records: list = []
    survivors: dict = {}
    skipped: list = []
    for replica, upper, lower, surv in results:
        if upper is None:
            skipped.append(replica)
            continue
        records.append(FieldRecord(replica=replica, kind="upper", positions=upper))
        records.append(FieldRecord(replica=replica, kind="lower", positions=lower))
        if surv is not None:
            survivors[replica] = surv
    bank = DataBank(header=_spec_header(spec), records=records, survivors=survivors, skipped=skipped)
    if spec.output_path is not None:
        bank.save(spec.output_path)
    return bank


def pooled_statistic(bank: DataBank, kind: str, statistic: str, k: int = 1) -> np.ndarray:
    """Pooled delta0 or jump-k sample of one field kind of a bank."""
    pool = GapPool.from_positions(bank.positions(kind))
    if statistic == "delta0":
        return delta0(pool)
    if statistic == "jump":
        return jump_k_ratios(pool, k)
    raise ValueError(f"unknown statistic {statistic!r}")


def _check_conventions(banks) -> None:
    base = banks[0].conventions()
    for bank in banks[1:]:
        if bank.conventions() != base:
            raise ConventionMismatchError(
                f"bank conventions differ: {bank.conventions()} vs {base}"
            )


def _fmt_p(p: float) -> str:
    return "<0.01" if p < 0.01 else f"{p:.2f}"


@dataclass
class PValueTable:
    """Labelled p-value matrix plus flat machine-readable rows."""

    row_labels: list
    col_labels: list
    cells: dict  # (row_index, col_index) -> display string
    entries: list  # dicts: row_model col_model field statistic k d p n1 n2

    def text(self) -> str:
        width = max(
            [len(s) for s in self.row_labels + self.col_labels]
            + [len(v) for v in self.cells.values()]
            + [1]
        )
        rows = [[""] + [c.rjust(width) for c in self.col_labels]]
        for i, label in enumerate(self.row_labels):
            row = [label]
            for j in range(len(self.col_labels)):
                row.append(self.cells.get((i, j), "-").rjust(width))
            rows.append(row)
        name_w = max(len(r[0]) for r in rows)
        return "\n".join(r[0].ljust(name_w) + "  " + "  ".join(r[1:]) for r in rows)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.text() + "\n")

    def save_machine(self, path) -> None:
        cols = ("row_model", "col_model", "field", "statistic", "k", "d", "p", "n1", "n2")
        with open(path, "w") as fh:
            fh.write("\t".join(cols) + "\n")
            for e in self.entries:
                fh.write(
                    "\t".join(
                        [
                            e["row_model"],
                            e["col_model"],
                            e["field"],
                            e["statistic"],
                            str(e["k"]),
                            f"{e['d']:.17g}",
                            f"{e['p']:.17g}",
                            str(e["n1"]),
                            str(e["n2"]),
                        ]
                    )
                    + "\n"
                )


def compare(banks, statistic: str = "delta0", k: int = 1, field: str = "both") -> PValueTable:
    """Pairwise K-S table between banks for one statistic.

    With field="both" the upper-field p-values fill the cells above the
    diagonal and the lower-field ones below; a single field fills both
    triangles symmetrically.
    """
    if field not in ("upper", "lower", "both"):
        raise ValueError(f"unknown field {field!r}")
    _check_conventions(banks)
    labels = [bank.label() for bank in banks]
    kinds = ("upper", "lower") if field == "both" else (field,)
    samples = {kind: [pooled_statistic(b, kind, statistic, k) for b in banks] for kind in kinds}
    cells: dict = {}
    entries: list = []
    for i in range(len(banks)):
        for j in range(i + 1, len(banks)):
            for kind in kinds:
                res = ks_test(samples[kind][i], samples[kind][j])
                entries.append(
                    dict(
                        row_model=labels[i],
                        col_model=labels[j],
                        field=kind,
                        statistic=statistic,
                        k=k if statistic == "jump" else 0,
                        d=res.d,
                        p=res.p,
                        n1=res.n1,
                        n2=res.n2,
                    )
                )
                if field == "both":
                    if kind == "upper":
                        cells[(i, j)] = f"U: {_fmt_p(res.p)}"
                    else:
                        cells[(j, i)] = f"L: {_fmt_p(res.p)}"
                else:
                    cells[(i, j)] = _fmt_p(res.p)
                    cells[(j, i)] = _fmt_p(res.p)
    return PValueTable(row_labels=labels, col_labels=labels, cells=cells, entries=entries)


def symmetry_table(banks) -> PValueTable:
    """Upper-vs-lower K-S per model, for delta0 and jump-1..6."""
    _check_conventions(banks)
    labels = [bank.label() for bank in banks]
    stat_rows = [("delta0", 0)] + [("jump", k) for k in range(1, 7)]
    row_labels = ["distance"] + [f"jump-{k}" for k in range(1, 7)]
    cells: dict = {}
    entries: list = []
    for j, bank in enumerate(banks):
        for i, (stat, k) in enumerate(stat_rows):
            upper = pooled_statistic(bank, "upper", stat, k)
            lower = pooled_statistic(bank, "lower", stat, k)
            if upper.size == 0 or lower.size == 0:  # every replica shorter than k windows
                cells[(i, j)] = "n/a"
                continue
            res = ks_test(upper, lower)
            cells[(i, j)] = _fmt_p(res.p)
            entries.append(
                dict(
                    row_model=labels[j],
                    col_model=labels[j],
                    field="upper-vs-lower",
                    statistic=stat,
                    k=k,
                    d=res.d,
                    p=res.p,
                    n1=res.n1,
                    n2=res.n2,
                )
            )
    return PValueTable(row_labels=row_labels, col_labels=labels, cells=cells, entries=entries)


def emit_plot_data(bank: DataBank, what: str, path) -> None:
    """Write plot-ready rows: survivor counts over time, or a gap histogram."""
    if what in ("survivors", "survivor_curve"):
        with open(path, "w") as fh:
            fh.write("t\tmean_live\n")
            if bank.survivors:
                traces = np.stack(list(bank.survivors.values()))
                means = traces.mean(axis=0)
                for t, value in enumerate(means):
                    fh.write(f"{t}\t{value:.17g}\n")
    elif what in ("gaps", "gap_histogram"):
        with open(path, "w") as fh:
            fh.write("bin_center\tfrequency\n")
            if bank.records:
                sample = pooled_statistic(bank, "upper", "delta0")
                counts, edges = np.histogram(sample, bins=50)
                centers = 0.5 * (edges[:-1] + edges[1:])
                for center, count in zip(centers, counts):
                    fh.write(f"{center:.17g}\t{int(count)}\n")
    else:
        raise ValueError(f"unknown plot data kind {what!r}")
