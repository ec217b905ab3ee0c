"""
Sweep configuration and the regret-scaling experiment.

Provides:
- ExperimentKind: which experiment a sweep runs
- SweepConfig: validated sweep definition, loadable from YAML
- regret_scaling: learner, fixed-K0 and K★ regret over a horizon grid
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

import settings
from console import get_logger
from errors import InvalidArgument
from executor import JobContext, JobResult, JobStatus, Policy, RegretRunExecutor, run_jobs_sync
from learner.schedule import ScheduleOverrides, theorem1_schedule
from lqr.analytics import infinite_horizon_cost, solve_optimal
from lqr.regularity import constants_for_system
from rng import SeedStreams, as_streams
from .benchmarks import resolve_system
from .config import golden, named_sweep, profile_overrides, read_yaml
from .fitting import ScalingFit, scaling_fit

logger = get_logger("experiments.sweep")

MIN_HORIZONS = 3
MIN_DECADES = 1.5
MIN_SEEDS = 5


class ExperimentKind(Enum):
    REGRET_SCALING = "regret_scaling"
    EXPLORATION_COST = "exploration_cost"
    CORRUPTED_GD_BOUND = "corrupted_gd_bound"
    GRADIENT_FIDELITY = "gradient_fidelity"


@dataclass
class SweepConfig:
    """
    One sweep.

    horizons and seeds only matter for REGRET_SCALING, which needs at least
    three horizons spanning 1.5 decades and five seeds per horizon.
    """
    kind: ExperimentKind
    system: str = "scalar"
    horizons: List[int] = field(default_factory=list)
    seeds: int = MIN_SEEDS
    overrides: ScheduleOverrides = field(default_factory=ScheduleOverrides)
    profile: Optional[str] = "desk"
    delta: float = 0.01
    name: str = ""

    def __post_init__(self):
        if isinstance(self.kind, str):
            try:
                self.kind = ExperimentKind(self.kind)
            except ValueError:
                choices = ", ".join(k.value for k in ExperimentKind)
                raise InvalidArgument(f"unknown experiment kind '{self.kind}', choose from {choices}")
        if not 0 < self.delta < 1:
            raise InvalidArgument(f"delta must lie in (0, 1), got {self.delta}")
        self.horizons = sorted(int(T) for T in self.horizons)
        if self.kind == ExperimentKind.REGRET_SCALING:
            if len(self.horizons) < MIN_HORIZONS:
                raise InvalidArgument(f"a scaling fit needs >= {MIN_HORIZONS} horizons, got {len(self.horizons)}")
            if self.horizons[0] < 1:
                raise InvalidArgument("horizons must be positive")
            decades = math.log10(self.horizons[-1] / self.horizons[0])
            if decades < MIN_DECADES - 1e-9:
                raise InvalidArgument(f"horizons span {decades:.2f} decades, need >= {MIN_DECADES}")
            if self.seeds < MIN_SEEDS:
                raise InvalidArgument(f"need >= {MIN_SEEDS} seeds per horizon, got {self.seeds}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepConfig":
        data = dict(data)
        system = str(data.get("system", "scalar"))
        profile = data.get("profile", "desk")
        overrides = profile_overrides(profile, Path(system).stem)
        if data.get("overrides"):
            merged = {k: v for k, v in vars(overrides).items()}
            merged.update(data["overrides"])
            overrides = ScheduleOverrides.from_dict(merged)
        return cls(
            kind=data["kind"],
            system=system,
            horizons=list(data.get("horizons", [])),
            seeds=int(data.get("seeds", MIN_SEEDS)),
            overrides=overrides,
            profile=profile,
            delta=float(data.get("delta", 0.01)),
            name=str(data.get("name", "")),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SweepConfig":
        """From a YAML file with the keys of from_dict."""
        return cls.from_dict(read_yaml(Path(path)))

    @classmethod
    def named(cls, name: str) -> "SweepConfig":
        """A sweep defined in profiles.yaml."""
        data = named_sweep(name)
        data.setdefault("name", name)
        return cls.from_dict(data)


class SuiteStatus(Enum):
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"


@dataclass
class RegretRun:
    """One (T, seed, policy) grid point."""
    T: int
    seed: int
    policy: Policy
    status: JobStatus
    regret: float = math.nan
    J_last: float = math.nan
    error: str = ""


@dataclass
class RegretScalingResult:
    """Regret-scaling fits per policy plus every run."""
    config: SweepConfig
    J_star: float
    runs: List[RegretRun]
    fits: Dict[Policy, ScalingFit]
    divergence_rate: float
    status: SuiteStatus

    kind = ExperimentKind.REGRET_SCALING

    @property
    def learner(self) -> ScalingFit:
        return self.fits[Policy.LEARNER]

    def excluded(self, policy: Policy) -> int:
        return sum(1 for r in self.runs if r.policy == policy and r.status != JobStatus.SUCCESS)


def _runs_from_results(results: List[JobResult]) -> List[RegretRun]:
    runs = []
    for res in results:
        T, seed, policy_idx = res.order
        policy = list(Policy)[policy_idx]
        runs.append(RegretRun(
            T=T,
            seed=seed,
            policy=policy,
            status=res.status,
            regret=float(res.value) if res.is_success() else math.nan,
            J_last=float(res.metadata.get("J_last", math.nan)),
            error=res.error,
        ))
    return runs


def regret_scaling(
    cfg: SweepConfig,
    rng,
    policies=(Policy.LEARNER, Policy.FIXED, Policy.OPTIMAL),
    workers: Optional[int] = None,
) -> RegretScalingResult:
    """
    Run every policy at every (T, seed) and fit log regret against log T.

    FIXED plays K0 throughout, OPTIMAL plays K★. All policies at one
    (T, seed) share the same noise stream. Diverged learner runs are excluded
    from the fit and counted; more than 20% divergence fails the sweep.
    """
    if cfg.kind != ExperimentKind.REGRET_SCALING:
        raise InvalidArgument(f"regret_scaling needs a regret_scaling config, got {cfg.kind.value}")
    streams: SeedStreams = as_streams(rng)
    loaded = resolve_system(cfg.system)
    system, K0 = loaded.system, loaded.K0

    K_star, J_star = solve_optimal(system)
    consts = constants_for_system(system, K0)
    logger.info("regret sweep on %s: J* = %.6g, J(K0) = %.6g", system.name, J_star, infinite_horizon_cost(system, K0))

    contexts = []
    for T in cfg.horizons:
        schedule = theorem1_schedule(consts, T, cfg.delta, system.d_x, system.d_u,
                                     system.noise.bound_W, cfg.overrides)
        for seed in range(cfg.seeds):
            point_streams = streams.child(T, seed)
            for policy in policies:
                params = {
                    "system": system, "T": T, "streams": point_streams,
                    "J_star": J_star, "policy": policy,
                }
                if policy == Policy.LEARNER:
                    params.update(schedule=schedule, K0=K0)
                else:
                    params["K"] = K0 if policy == Policy.FIXED else K_star
                contexts.append(JobContext(
                    kind="regret",
                    order=(T, seed, list(Policy).index(policy)),
                    params=params,
                ))

    results = run_jobs_sync(contexts, RegretRunExecutor(), workers or settings.worker_count())
    runs = _runs_from_results(results)

    fits: Dict[Policy, ScalingFit] = {}
    fit_rng = streams.generator(len(cfg.horizons))
    for policy in policies:
        samples = [
            [r.regret for r in runs if r.policy == policy and r.T == T and r.status == JobStatus.SUCCESS]
            for T in cfg.horizons
        ]
        fits[policy] = scaling_fit(cfg.horizons, samples, fit_rng)

    learner_runs = [r for r in runs if r.policy == Policy.LEARNER]
    diverged = sum(1 for r in learner_runs if r.status == JobStatus.DIVERGED)
    divergence_rate = diverged / len(learner_runs) if learner_runs else 0.0
    if diverged:
        logger.warning("%d of %d learner runs diverged", diverged, len(learner_runs))
    failed = sum(1 for r in runs if r.status in (JobStatus.FAILED, JobStatus.TIMEOUT))

    max_rate = golden("regret_scaling")["max_divergence_rate"]
    if failed:
        status = SuiteStatus.ERROR
    elif divergence_rate > max_rate:
        logger.warning("divergence rate %.0f%% exceeds %.0f%%: overrides look miscalibrated",
                       100 * divergence_rate, 100 * max_rate)
        status = SuiteStatus.FAIL
    else:
        status = SuiteStatus.PASS

    return RegretScalingResult(
        config=cfg,
        J_star=J_star,
        runs=runs,
        fits=fits,
        divergence_rate=divergence_rate,
        status=status,
    )


def check_regret_windows(result: RegretScalingResult) -> Dict[str, bool]:
    """Learner slope window, fixed slope window and the learner/fixed gap."""
    windows = golden("regret_scaling")
    learner = result.fits.get(Policy.LEARNER)
    fixed = result.fits.get(Policy.FIXED)
    checks = {"divergence": result.status == SuiteStatus.PASS}
    if learner is not None:
        checks["learner_slope"] = learner.within(*windows["learner_slope"])
    if fixed is not None:
        checks["fixed_slope"] = fixed.within(*windows["fixed_slope"])
    if learner is not None and fixed is not None:
        checks["slope_gap"] = bool(
            np.isfinite(learner.slope) and np.isfinite(fixed.slope)
            and fixed.slope - learner.slope >= windows["min_slope_gap"]
        )
    return checks
