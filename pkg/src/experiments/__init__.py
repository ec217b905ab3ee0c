"""
LQR-PG Experiments Module
Scaling sweeps, validation suites and their reports.

Exports:
- SweepConfig, regret_scaling: regret-vs-horizon sweeps over seeds
- exploration_cost_scaling, gradient_fidelity, corrupted_gd_bound_suite
- run_validation: the frozen acceptance checks
- emit_report: CSV tables and SVG plots
"""

from .benchmarks import BENCHMARK_NAMES, all_benchmarks, benchmark, random_stable_system, resolve_system
from .fitting import ScalingFit, fit_loglog, scaling_fit
from .sweep import (
    ExperimentKind,
    RegretRun,
    RegretScalingResult,
    SuiteStatus,
    SweepConfig,
    check_regret_windows,
    regret_scaling,
)
from .exploration import ExplorationPoint, ExplorationResult, exploration_cost_scaling, geometric_grid
from .fidelity import FidelityPoint, FidelityReport, gradient_fidelity, smoothing_bias
from .gd_suite import GdSuiteReport, GdSuiteRow, Pattern, PLObjective, corrupted_gd_bound_suite, default_zoo
from .report import emit_report
from .validate import SUITES, SuiteResult, ValidationReport, run_validation

__all__ = [
    "BENCHMARK_NAMES",
    "all_benchmarks",
    "benchmark",
    "random_stable_system",
    "resolve_system",
    "ScalingFit",
    "fit_loglog",
    "scaling_fit",
    "ExperimentKind",
    "RegretRun",
    "RegretScalingResult",
    "SuiteStatus",
    "SweepConfig",
    "check_regret_windows",
    "regret_scaling",
    "ExplorationPoint",
    "ExplorationResult",
    "exploration_cost_scaling",
    "geometric_grid",
    "FidelityPoint",
    "FidelityReport",
    "gradient_fidelity",
    "smoothing_bias",
    "GdSuiteReport",
    "GdSuiteRow",
    "Pattern",
    "PLObjective",
    "corrupted_gd_bound_suite",
    "default_zoo",
    "emit_report",
    "SUITES",
    "SuiteResult",
    "ValidationReport",
    "run_validation",
]
