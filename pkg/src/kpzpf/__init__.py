"""Point fields of coalescing fractional Brownian motions and last-passage percolation.

Simulates particle systems of coalescing fBM under several merge rules and
the exponential corner-growth model, extracts upper/lower point fields from
the induced monotone maps, and compares gap statistics across models with
two-sample Kolmogorov-Smirnov tests.
"""

__version__ = "0.1.0"

from .fgn import autocovariance, build_plan, sample_fgn, sample_path
from .coalesce import CoalescenceRule, SystemConfig, init_system, run
from .lpp import LppConfig, StationaryBoundary, fill_passage, backtrack_forest, lpp_monotone_map
from .fields import MonotoneMap, PointField, upper_field, lower_field, trim, rescale
from .stats import GapPool, KsResult, delta0, jump_k_ratios, ks_test
from .harness import (
    CfbmModel,
    LppModel,
    ExperimentSpec,
    DataBank,
    run_experiment,
    compare,
    symmetry_table,
    emit_plot_data,
)

__all__ = [
    "__version__",
    "autocovariance",
    "build_plan",
    "sample_fgn",
    "sample_path",
    "CoalescenceRule",
    "SystemConfig",
    "init_system",
    "run",
    "LppConfig",
    "StationaryBoundary",
    "fill_passage",
    "backtrack_forest",
    "lpp_monotone_map",
    "MonotoneMap",
    "PointField",
    "upper_field",
    "lower_field",
    "trim",
    "rescale",
    "GapPool",
    "KsResult",
    "delta0",
    "jump_k_ratios",
    "ks_test",
    "CfbmModel",
    "LppModel",
    "ExperimentSpec",
    "DataBank",
    "run_experiment",
    "compare",
    "symmetry_table",
    "emit_plot_data",
]
