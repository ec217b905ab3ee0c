"""
LQR-PG command line.

    python src/main.py solve    --system scalar
    python src/main.py rollout  --system scalar --T 1000 --controller optimal
    python src/main.py learn    --system scalar --T 20000 --seed 3
    python src/main.py sweep    --kind regret_scaling --system scalar --quick
    python src/main.py validate --quick

Every printed summary field is also written to a CSV under --out.

Exit codes:
    0  success
    1  a validation suite or sweep check failed
    2  bad arguments, unreadable or malformed system file
    3  a solver did not converge
    4  the learner diverged (the partial trace is still written)
"""

import argparse
import math
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

import console
from console import configure_logging, get_logger
from errors import InvalidArgument, LearnerDiverged, NoConvergence
from executor import Policy
from experiments import (
    BENCHMARK_NAMES,
    ExperimentKind,
    SuiteStatus,
    SweepConfig,
    check_regret_windows,
    corrupted_gd_bound_suite,
    emit_report,
    exploration_cost_scaling,
    geometric_grid,
    gradient_fidelity,
    regret_scaling,
    resolve_system,
    run_validation,
)
from experiments.config import golden, named_sweep, profile_overrides
from learner import ScheduleOverrides, regret, run, theorem1_schedule, write_epoch_csv, write_trace_csv
from lqr.analytics import infinite_horizon_cost, solve_optimal
from lqr.loader import SystemFile
from lqr.regularity import constants_for_system, cost_bound, state_bound
from lqr.system import Controller
from rng import SeedStreams
from simulator.rollout import rollout_fixed, write_trajectory_csv
from tables import write_csv

logger = get_logger("cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_DIVERGED = 4

DEFAULT_T = 20_000
DEFAULT_OUT = "results"


class Command(Enum):
    SOLVE = "solve"
    ROLLOUT = "rollout"
    LEARN = "learn"
    SWEEP = "sweep"
    VALIDATE = "validate"


@dataclass
class CliConfig:
    """Parsed and checked command-line options."""
    command: Command
    system: str = "scalar"
    T: int = DEFAULT_T
    seed: int = 0
    out: Path = Path(DEFAULT_OUT)
    eta_mult: float = 1.0
    r0_mult: float = 1.0
    m0_mult: float = 1.0
    tau_mult: float = 1.0
    profile: Optional[str] = "desk"
    delta: float = 0.01
    quick: bool = False
    verbosity: int = 0
    controller: str = "initial"
    kind: Optional[str] = None
    sweep_name: Optional[str] = None
    sweep_config: Optional[Path] = None
    horizons: List[int] = field(default_factory=list)
    seeds: Optional[int] = None
    simulated_costs: bool = False
    workers: Optional[int] = None

    def __post_init__(self):
        if self.T < 1:
            raise InvalidArgument(f"--T must be positive, got {self.T}")
        if self.seed < 0:
            raise InvalidArgument(f"--seed must be non-negative, got {self.seed}")
        for name in ("eta_mult", "r0_mult", "m0_mult", "tau_mult"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"--{name.replace('_', '-')} must be positive, got {getattr(self, name)}")
        if not 0 < self.delta < 1:
            raise InvalidArgument(f"--delta must lie in (0, 1), got {self.delta}")
        if self.system not in BENCHMARK_NAMES and not Path(self.system).is_file():
            raise InvalidArgument(f"--system '{self.system}' is neither a benchmark nor an existing file")
        if self.sweep_config is not None and not self.sweep_config.is_file():
            raise InvalidArgument(f"--config '{self.sweep_config}' does not exist")
        if self.seeds is not None and self.seeds < 1:
            raise InvalidArgument(f"--seeds must be positive, got {self.seeds}")
        if self.workers is not None and self.workers < 1:
            raise InvalidArgument(f"--workers must be positive, got {self.workers}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        return cls(
            command=Command(args.command),
            system=args.system,
            T=args.T,
            seed=args.seed,
            out=Path(args.out),
            eta_mult=args.eta_mult,
            r0_mult=args.r0_mult,
            m0_mult=args.m0_mult,
            tau_mult=args.tau_mult,
            profile=None if args.profile == "none" else args.profile,
            delta=args.delta,
            quick=args.quick,
            verbosity=args.verbose,
            controller=getattr(args, "controller", "initial"),
            kind=getattr(args, "kind", None),
            sweep_name=getattr(args, "name", None),
            sweep_config=Path(args.config) if getattr(args, "config", None) else None,
            horizons=list(getattr(args, "horizons", None) or []),
            seeds=getattr(args, "seeds", None),
            simulated_costs=getattr(args, "simulated_costs", False),
            workers=getattr(args, "workers", None),
        )

    def overrides(self, system_name: str) -> ScheduleOverrides:
        """Profile pins for the system with the multiplier flags on top."""
        return profile_overrides(self.profile, system_name).with_multipliers(
            eta_mult=self.eta_mult, r0_mult=self.r0_mult, m0_mult=self.m0_mult, tau_mult=self.tau_mult,
        )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", default="scalar",
                        help=f"TOML system file or benchmark name ({', '.join(BENCHMARK_NAMES)})")
    common.add_argument("--T", type=int, default=DEFAULT_T, help="horizon in rounds")
    common.add_argument("--seed", type=int, default=0, help="root seed of all random substreams")
    common.add_argument("--out", default=DEFAULT_OUT, help="output directory for CSV and SVG files")
    common.add_argument("--eta-mult", type=float, default=1.0)
    common.add_argument("--r0-mult", type=float, default=1.0)
    common.add_argument("--m0-mult", type=float, default=1.0)
    common.add_argument("--tau-mult", type=float, default=1.0)
    common.add_argument("--profile", default="desk",
                        help="override profile from profiles.yaml; 'none' for the theoretical schedule")
    common.add_argument("--delta", type=float, default=0.01, help="confidence parameter")
    common.add_argument("--quick", action="store_true", help="reduced sample sizes")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    parser = argparse.ArgumentParser(prog="lqrpg", description="Model-free online policy gradient for LQR")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("solve", parents=[common], help="optimal controller, constants and schedule")

    p = sub.add_parser("rollout", parents=[common], help="play a fixed controller")
    p.add_argument("--controller", choices=["initial", "optimal"], default="initial")

    sub.add_parser("learn", parents=[common], help="one online learning run")

    p = sub.add_parser("sweep", parents=[common], help="scaling experiments")
    p.add_argument("--kind", choices=[k.value for k in ExperimentKind])
    p.add_argument("--name", help="named sweep from profiles.yaml")
    p.add_argument("--config", help="YAML sweep definition")
    p.add_argument("--horizons", type=int, nargs="+", help="regret sweep horizons")
    p.add_argument("--seeds", type=int, help="seeds per horizon")
    p.add_argument("--simulated-costs", action="store_true",
                   help="gradient fidelity from simulated instead of exact costs")
    p.add_argument("--workers", type=int, help="worker count (default LQRPG_THREADS)")

    sub.add_parser("validate", parents=[common], help="run every validation suite")
    return parser


# ==================== OUTPUT ====================

Row = Tuple[str, Any]


def _show(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return str(value)


def _summary(title: str, rows: Sequence[Row], path: Path) -> Path:
    """Print rows in order and mirror them to a name,value CSV."""
    console.banner(title)
    for name, value in rows:
        console.field(name, _show(value))
    return write_csv(path, ["name", "value"], rows)


def _matrix_rows(prefix: str, M: np.ndarray) -> List[Row]:
    return [(f"{prefix}[{i},{j}]", float(M[i, j])) for i, j in np.ndindex(*M.shape)]


def _load(cfg: CliConfig) -> SystemFile:
    return resolve_system(cfg.system)


# ==================== COMMANDS ====================

def cmd_solve(cfg: CliConfig) -> int:
    loaded = _load(cfg)
    system = loaded.system
    K_star, J_star = solve_optimal(system)
    consts = constants_for_system(system, loaded.K0)
    schedule = theorem1_schedule(consts, cfg.T, cfg.delta, system.d_x, system.d_u,
                                 system.noise.bound_W, cfg.overrides(system.name))
    theory = schedule.theoretical

    rows: List[Row] = [("system", system.name), ("d_x", system.d_x), ("d_u", system.d_u)]
    rows += _matrix_rows("K_star", K_star.K)
    rows += [
        ("J_star", J_star),
        ("J_K0", infinite_horizon_cost(system, loaded.K0)),
        ("nu", consts.nu),
        ("alpha0", consts.alpha0),
        ("psi", consts.psi),
        ("sigma_sq", consts.sigma_sq),
        ("W", system.noise.bound_W),
        ("kappa", consts.kappa),
        ("gamma", consts.gamma),
        ("D0", consts.D0),
        ("G", consts.G),
        ("beta", consts.beta),
        ("mu", consts.mu),
        ("T", cfg.T),
        ("delta", cfg.delta),
        ("theoretical_eta", theory.eta),
        ("theoretical_tau", theory.tau),
        ("theoretical_mu", theory.mu),
        ("theoretical_r0", theory.r0),
        ("theoretical_m0", theory.m0),
        ("theoretical_D0", theory.D0),
        ("eta", schedule.eta),
        ("tau", schedule.tau),
        ("mu_schedule", schedule.mu),
        ("r0", schedule.r0),
        ("m0", schedule.m0),
        ("D0_schedule", schedule.D0),
        ("rho", schedule.rho),
        ("eta_cap", schedule.eta_cap),
        ("r0_clamped", schedule.r0_clamped),
        ("theoretical_only", schedule.theoretical_only),
        ("regret_bound_scale", schedule.regret_bound_scale),
    ]
    _summary(f"Optimal controller and schedule ({system.name})", rows, cfg.out / "solve.csv")
    return EXIT_OK


def cmd_rollout(cfg: CliConfig) -> int:
    loaded = _load(cfg)
    system = loaded.system
    K_star, J_star = solve_optimal(system)
    K = K_star if cfg.controller == "optimal" else loaded.K0

    streams = SeedStreams(cfg.seed)
    states, costs = rollout_fixed(system, K, None, cfg.T, streams.noise())
    path = write_trajectory_csv(cfg.out / "trajectory.csv", system, K, states, costs)

    rows: List[Row] = [
        ("system", system.name),
        ("controller", cfg.controller),
        ("T", cfg.T),
        ("seed", cfg.seed),
        ("J_K", infinite_horizon_cost(system, K)),
        ("J_star", J_star),
        ("mean_cost", float(costs.mean())),
        ("regret", float(np.sum(costs - J_star))),
        ("max_state_norm", float(np.linalg.norm(states, axis=1).max())),
    ]
    _summary(f"Rollout ({system.name}, {cfg.controller} controller)", rows, cfg.out / "rollout_summary.csv")
    console.success(f"trajectory written to {path}")
    return EXIT_OK


def _learn_rows(system, consts, trace, J_star: float, T: int, seed: int) -> List[Row]:
    J_last = infinite_horizon_cost(system, Controller(trace.K_last)) if trace.K_last is not None else math.nan
    x_bound = state_bound(consts, system.noise.bound_W)
    c_bound = cost_bound(consts, system.noise.bound_W)
    if trace.max_state_norm > x_bound or trace.max_cost > c_bound:
        logger.warning("run left the bounded-state regime: max |x| %.4g (bound %.4g), max cost %.4g (bound %.4g)",
                       trace.max_state_norm, x_bound, trace.max_cost, c_bound)
    return [
        ("system", system.name),
        ("T", T),
        ("seed", seed),
        ("rounds_played", int(trace.costs.shape[0])),
        ("epochs", len(trace.epoch_records)),
        ("J_star", J_star),
        ("regret", regret(trace)),
        ("J_last", J_last),
        ("J_last_gap", J_last - J_star),
        ("max_state_norm", trace.max_state_norm),
        ("max_cost", trace.max_cost),
        ("state_bound", x_bound),
        ("cost_bound", c_bound),
        ("diverged", trace.diverged or ""),
    ]


def cmd_learn(cfg: CliConfig) -> int:
    loaded = _load(cfg)
    system = loaded.system
    _, J_star = solve_optimal(system)
    consts = constants_for_system(system, loaded.K0)
    schedule = theorem1_schedule(consts, cfg.T, cfg.delta, system.d_x, system.d_u,
                                 system.noise.bound_W, cfg.overrides(system.name))
    if not schedule.eta_within_cap:
        console.warn(f"eta = {schedule.eta:.4g} exceeds the descent precondition {schedule.eta_cap:.4g}")

    try:
        trace = run(system, loaded.K0, schedule, cfg.T, SeedStreams(cfg.seed), J_star=J_star)
    except LearnerDiverged as e:
        if e.trace is not None:
            write_trace_csv(cfg.out / "trace.csv", e.trace)
            write_epoch_csv(cfg.out / "epochs.csv", e.trace)
            _summary(f"Learning run ({system.name}) DIVERGED",
                     _learn_rows(system, consts, e.trace, J_star, cfg.T, cfg.seed), cfg.out / "learn_summary.csv")
        console.failure(str(e))
        return EXIT_DIVERGED

    write_trace_csv(cfg.out / "trace.csv", trace)
    write_epoch_csv(cfg.out / "epochs.csv", trace)
    _summary(f"Learning run ({system.name})", _learn_rows(system, consts, trace, J_star, cfg.T, cfg.seed),
             cfg.out / "learn_summary.csv")
    console.success(f"trace and epoch tables written to {cfg.out}")
    return EXIT_OK


def _sweep_config(cfg: CliConfig) -> SweepConfig:
    if cfg.sweep_config is not None:
        sweep = SweepConfig.load(cfg.sweep_config)
    elif cfg.sweep_name:
        sweep = SweepConfig.named(cfg.sweep_name)
    elif cfg.kind:
        data = {"kind": cfg.kind, "system": cfg.system, "profile": cfg.profile, "delta": cfg.delta}
        if cfg.kind == ExperimentKind.REGRET_SCALING.value:
            defaults = named_sweep("regret_scalar_quick" if cfg.quick else "regret_scalar")
            data["horizons"] = cfg.horizons or defaults["horizons"]
            data["seeds"] = cfg.seeds or defaults["seeds"]
        sweep = SweepConfig.from_dict(data)
    else:
        raise InvalidArgument("sweep needs one of --kind, --name or --config")

    sweep.overrides = sweep.overrides.with_multipliers(
        eta_mult=cfg.eta_mult, r0_mult=cfg.r0_mult, m0_mult=cfg.m0_mult, tau_mult=cfg.tau_mult,
    )
    return sweep


def cmd_sweep(cfg: CliConfig) -> int:
    sweep = _sweep_config(cfg)
    streams = SeedStreams(cfg.seed)
    rows: List[Row] = [("kind", sweep.kind.value), ("system", sweep.system), ("seed", cfg.seed)]
    ok = True

    if sweep.kind == ExperimentKind.REGRET_SCALING:
        result = regret_scaling(sweep, streams, workers=cfg.workers)
        rows.append(("J_star", result.J_star))
        for policy, fit in result.fits.items():
            rows += [(f"{policy.value}_slope", fit.slope), (f"{policy.value}_slope_stderr", fit.slope_stderr),
                     (f"{policy.value}_r2", fit.r2), (f"{policy.value}_excluded", result.excluded(policy))]
        rows.append(("divergence_rate", result.divergence_rate))
        checks = check_regret_windows(result) if Policy.LEARNER in result.fits else {}
        rows += [(f"check_{name}", passed) for name, passed in checks.items()]
        ok = all(checks.values())

    elif sweep.kind == ExperimentKind.EXPLORATION_COST:
        loaded = resolve_system(sweep.system)
        K_star, _ = solve_optimal(loaded.system)
        windows = golden("exploration")
        r_range = windows["r_range"].get(loaded.system.name, windows["r_range"]["random_3x2"])
        result = exploration_cost_scaling(
            loaded.system, K_star, geometric_grid(*r_range, windows["points"]),
            windows["quick_m" if cfg.quick else "m"], windows["tau"], streams, D0=sweep.overrides.D0,
        )
        rows += [("direct_slope", result.direct.slope), ("direct_r2", result.direct.r2),
                 ("switching_slope", result.switching.slope), ("excluded", result.excluded)]

    elif sweep.kind == ExperimentKind.GRADIENT_FIDELITY:
        loaded = resolve_system(sweep.system)
        windows = golden("fidelity")
        result = gradient_fidelity(
            loaded.system, loaded.K0, windows["r"], windows["quick_m_grid" if cfg.quick else "m_grid"],
            windows["tau"], streams, repetitions=windows["repetitions"], exact_costs=not cfg.simulated_costs,
        )
        rows += [("r", result.r), ("exact_costs", result.exact_costs), ("decay_exponent", result.decay_exponent),
                 ("bias_floor", result.bias_floor), ("grad_norm", result.grad_norm)]

    else:
        windows = golden("gd_suite")
        result = corrupted_gd_bound_suite(
            None, streams, steps=windows["quick_steps" if cfg.quick else "steps"],
            corruption_fraction=windows["corruption_fraction"], oversize_factor=windows["oversize_factor"],
        )
        rows += [("runs", len(result.rows)), ("violations", result.total_violations)]
        ok = result.passed

    emit_report(result, cfg.out)
    rows.append(("passed", ok))
    _summary(f"Sweep {sweep.name or sweep.kind.value}", rows, cfg.out / f"sweep_{sweep.kind.value}_summary.csv")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_validate(cfg: CliConfig) -> int:
    report = run_validation(seed=cfg.seed, quick=cfg.quick)
    cfg.out.mkdir(parents=True, exist_ok=True)
    report.write_csv(cfg.out / "validation.csv")
    for suite in report.suites:
        if suite.artifacts:
            emit_report(suite.artifacts, cfg.out)

    console.banner(f"Validation ({'quick' if cfg.quick else 'full'}, seed {cfg.seed})")
    for suite in report.suites:
        line = f"{suite.name:<30} {_show(suite.metric):>12}  {suite.threshold:<28} {suite.detail}"
        if suite.status == SuiteStatus.PASS:
            console.success(line)
        else:
            console.failure(f"{line} [{suite.status.value}]")

    if report.passed:
        console.success("all suites passed")
        return EXIT_OK
    console.failure(f"failed: {', '.join(report.failed)}")
    return EXIT_CHECK_FAILED


COMMANDS = {
    Command.SOLVE: cmd_solve,
    Command.ROLLOUT: cmd_rollout,
    Command.LEARN: cmd_learn,
    Command.SWEEP: cmd_sweep,
    Command.VALIDATE: cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        cfg = CliConfig.from_args(args)
        return COMMANDS[cfg.command](cfg)
    except tomllib.TOMLDecodeError as e:
        console.failure(f"malformed system file {args.system}: {e}")
        return EXIT_BAD_INPUT
    except (InvalidArgument, FileNotFoundError) as e:
        console.failure(str(e))
        return EXIT_BAD_INPUT
    except NoConvergence as e:
        console.failure(str(e))
        return EXIT_NO_CONVERGENCE
    except LearnerDiverged as e:
        console.failure(str(e))
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
