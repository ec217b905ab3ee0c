"""
CSV tables and static SVG plots for experiment results.

Output is byte-identical for identical results: floats use .17g, SVG ids
come from a fixed hash salt and the Date metadata is dropped.
"""

from pathlib import Path
from typing import List, Sequence, Union

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from console import get_logger
from errors import InvalidArgument
from tables import write_csv
from .exploration import ExplorationResult
from .fidelity import FidelityReport
from .fitting import ScalingFit
from .gd_suite import GdSuiteReport
from .sweep import ExperimentKind, RegretScalingResult

logger = get_logger("experiments.report")

matplotlib.rcParams["svg.hashsalt"] = "lqrpg"
matplotlib.rcParams["svg.fonttype"] = "path"

BASENAMES = {
    ExperimentKind.REGRET_SCALING: "regret_scaling",
    ExperimentKind.EXPLORATION_COST: "exploration_cost",
    ExperimentKind.GRADIENT_FIDELITY: "gradient_fidelity",
    ExperimentKind.CORRUPTED_GD_BOUND: "corrupted_gd_bound",
}

HEADERS = {
    ExperimentKind.REGRET_SCALING: ["T", "seed", "policy", "status", "regret", "J_last"],
    ExperimentKind.EXPLORATION_COST: ["system", "r", "direct_cost", "switching_cost", "pairs", "excluded"],
    ExperimentKind.GRADIENT_FIDELITY: ["system", "r", "exact_costs", "m", "mean_error", "stderr", "bias_floor"],
    ExperimentKind.CORRUPTED_GD_BOUND: [
        "objective", "pattern", "in_contract", "eps0", "eta", "steps",
        "violations", "first_violation", "final_gap", "final_bound", "diverged",
    ],
}

FIT_HEADER = ["label", "slope", "intercept", "r2", "slope_stderr", "points", "dropped"]

Result = Union[RegretScalingResult, ExplorationResult, FidelityReport, GdSuiteReport]


def _fit_row(label: str, fit: ScalingFit) -> list:
    return [label, fit.slope, fit.intercept, fit.r2, fit.slope_stderr, fit.n_points, len(fit.dropped)]


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _loglog_plot(path: Path, title: str, xlabel: str, ylabel: str, series) -> Path:
    """series: (label, ScalingFit) pairs; points with error bars plus the fitted line."""
    fig = Figure(figsize=(6, 4.5))
    ax = fig.subplots()
    for label, fit in series:
        keep = np.isfinite(fit.means) & (fit.means > 0)
        if not keep.any():
            continue
        x, y = fit.x[keep], fit.means[keep]
        err = np.nan_to_num(fit.stderrs[keep])
        line = ax.errorbar(x, y, yerr=err, fmt="o", capsize=3, label=f"{label} (slope {fit.slope:.3f})")
        if np.isfinite(fit.slope):
            ax.plot(x, fit.predict(x), "-", color=line[0].get_color(), alpha=0.7)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    return _save(fig, path)


def _emit_regret(result: RegretScalingResult, out_dir: Path) -> List[Path]:
    base = BASENAMES[ExperimentKind.REGRET_SCALING]
    rows = [[r.T, r.seed, r.policy.value, r.status.value, r.regret, r.J_last] for r in result.runs]
    paths = [write_csv(out_dir / f"{base}.csv", HEADERS[ExperimentKind.REGRET_SCALING], rows)]
    fit_rows = [_fit_row(p.value, f) for p, f in result.fits.items()]
    paths.append(write_csv(out_dir / f"{base}_fit.csv", FIT_HEADER, fit_rows))
    if result.runs:
        paths.append(_loglog_plot(
            out_dir / f"{base}.svg", f"Regret scaling ({result.config.system})", "horizon T", "mean regret",
            [(p.value, f) for p, f in result.fits.items()],
        ))
    return paths


def _emit_exploration(result: ExplorationResult, out_dir: Path) -> List[Path]:
    base = f"{BASENAMES[ExperimentKind.EXPLORATION_COST]}_{result.system_name}"
    rows = [[result.system_name, p.r, p.direct_mean, p.switching_mean, p.n_pairs, p.excluded] for p in result.points]
    paths = [write_csv(out_dir / f"{base}.csv", HEADERS[ExperimentKind.EXPLORATION_COST], rows)]
    fits = [("direct", result.direct)]
    if result.switching is not None:
        fits.append(("switching", result.switching))
    paths.append(write_csv(out_dir / f"{base}_fit.csv", FIT_HEADER, [_fit_row(label, fit) for label, fit in fits]))
    if result.points:
        paths.append(_loglog_plot(
            out_dir / f"{base}.svg", f"Exploration cost ({result.system_name})", "radius r", "cost", fits,
        ))
    return paths


def _emit_fidelity(result: FidelityReport, out_dir: Path) -> List[Path]:
    base = BASENAMES[ExperimentKind.GRADIENT_FIDELITY]
    rows = [[result.system_name, result.r, result.exact_costs, p.m, p.mean_error, p.stderr, result.bias_floor]
            for p in result.points]
    paths = [write_csv(out_dir / f"{base}.csv", HEADERS[ExperimentKind.GRADIENT_FIDELITY], rows)]
    paths.append(write_csv(out_dir / f"{base}_fit.csv", FIT_HEADER, [_fit_row("decay", result.decay)]))
    if result.points:
        paths.append(_loglog_plot(
            out_dir / f"{base}.svg", f"Gradient estimate error ({result.system_name}, r={result.r:g})",
            "directions m", "mean error", [("error", result.decay)],
        ))
    return paths


def _emit_gd_suite(result: GdSuiteReport, out_dir: Path) -> List[Path]:
    base = BASENAMES[ExperimentKind.CORRUPTED_GD_BOUND]
    rows = [[r.objective, r.pattern.value, r.in_contract, r.eps0, r.eta, r.steps, r.violations,
             r.first_violation, r.final_gap, r.final_bound, r.diverged] for r in result.rows]
    paths = [write_csv(out_dir / f"{base}.csv", HEADERS[ExperimentKind.CORRUPTED_GD_BOUND], rows)]

    traced = [r for r in result.rows if r.in_contract and r.gaps.size]
    if traced:
        first = traced[0].objective
        fig = Figure(figsize=(6, 4.5))
        ax = fig.subplots()
        for r in (r for r in traced if r.objective == first):
            t = np.arange(r.gaps.size)
            line, = ax.plot(t, np.maximum(r.gaps, 1e-16), label=f"{r.pattern.value} gap")
            ax.plot(t, r.bounds, "--", color=line.get_color(), alpha=0.7)
        ax.set_yscale("log")
        ax.set_xlabel("step t")
        ax.set_ylabel("f(x_t) - f*")
        ax.set_title(f"Corrupted GD vs envelope ({first}); dashed = bound")
        ax.grid(True, alpha=0.3)
        ax.legend()
        paths.append(_save(fig, out_dir / f"{base}.svg"))
    return paths


_EMITTERS = {
    RegretScalingResult: _emit_regret,
    ExplorationResult: _emit_exploration,
    FidelityReport: _emit_fidelity,
    GdSuiteReport: _emit_gd_suite,
}


def emit_report(results: Union[Result, Sequence[Result]], out_dir: Union[str, Path], kind: ExperimentKind = None) -> List[Path]:
    """
    Write CSV tables and SVG plots for each result under out_dir.

    With no results, `kind` selects a header-only CSV.

    Raises:
        OSError: if out_dir cannot be written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not isinstance(results, (list, tuple)):
        results = [results]

    if not results:
        if kind is None:
            raise InvalidArgument("empty results need an experiment kind")
        return [write_csv(out_dir / f"{BASENAMES[kind]}.csv", HEADERS[kind], [])]

    paths: List[Path] = []
    for result in results:
        emitter = _EMITTERS.get(type(result))
        if emitter is None:
            raise InvalidArgument(f"no report for {type(result).__name__}")
        paths.extend(emitter(result, out_dir))
    for p in paths:
        logger.info("wrote %s", p)
    return paths
