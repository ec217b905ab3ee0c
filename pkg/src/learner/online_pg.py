"""
Online policy gradient for LQR.

The learner works in epochs. In epoch j it draws m_j directions U on the unit
Frobenius sphere, plays K_j + r_j U for τ rounds each (the state carries over,
no resets), keeps only the cost of the final round of each sub-epoch, forms
the one-point estimate g_j and steps K_{j+1} = K_j − η g_j.

OnlinePolicyGradient never sees the plant: it is handed scalar costs only.
run() wires it to a Plant and records ground-truth diagnostics (J(K_j),
∇J(K_j)) on the side.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from console import get_logger
from errors import InvalidArgument, LearnerDiverged, NumericOverflow
from lqr.analytics import exact_policy_gradient, infinite_horizon_cost, solve_optimal
from lqr.system import Controller, LqrSystem
from rng import SeedStreams, as_streams
from simulator.rollout import Plant
from smoothing.sphere import one_point_estimate, sample_sphere
from .schedule import Schedule, epoch_plan

logger = get_logger("learner.online_pg")


@dataclass
class EpochRecord:
    """What happened in one epoch."""
    j: int
    K: np.ndarray
    r: float
    m: int
    steps: int
    truncated: bool
    J_K: float
    final_costs: np.ndarray
    directions: np.ndarray
    g: Optional[np.ndarray] = None
    grad_true: Optional[np.ndarray] = None
    grad_err_bound: float = math.nan

    @property
    def m_observed(self) -> int:
        return int(self.final_costs.shape[0])

    @property
    def grad_est_norm(self) -> float:
        return float(np.linalg.norm(self.g)) if self.g is not None else math.nan

    @property
    def grad_true_norm(self) -> float:
        return float(np.linalg.norm(self.grad_true)) if self.grad_true is not None else math.nan

    @property
    def grad_angle_deg(self) -> float:
        """Angle between g_j and ∇J(K_j) in degrees."""
        if self.g is None or self.grad_true is None:
            return math.nan
        denom = np.linalg.norm(self.g) * np.linalg.norm(self.grad_true)
        if denom == 0:
            return math.nan
        cos = float(np.sum(self.g * self.grad_true) / denom)
        return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


@dataclass
class RegretTrace:
    """Per-round costs of one run plus epoch diagnostics."""
    costs: np.ndarray
    J_star: float
    epoch_records: List[EpochRecord]
    epoch_of_step: np.ndarray
    subepoch_of_step: np.ndarray
    T: int
    K_last: Optional[np.ndarray] = None
    diverged: Optional[str] = None
    max_state_norm: float = 0.0
    max_cost: float = 0.0

    @property
    def regret_curve(self) -> np.ndarray:
        """Partial sums Σ_{s ≤ t} (c_s − J★)."""
        return np.cumsum(self.costs - self.J_star)

    @property
    def completed(self) -> bool:
        return self.diverged is None and self.costs.shape[0] == self.T

    def steps_by_epoch(self) -> Dict[int, int]:
        ids, counts = np.unique(self.epoch_of_step, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}


def regret(trace: RegretTrace) -> float:
    """Σ_t (c_t − J★); zero for an empty trace."""
    if trace.costs.size == 0:
        return 0.0
    return float(np.sum(trace.costs - trace.J_star))


class OnlinePolicyGradient:
    """
    The learner's side of the protocol.

    Holds only its current gain and the schedule; costs arrive from outside.
    """

    def __init__(self, K0: np.ndarray, schedule: Schedule):
        self.K = np.array(K0, dtype=float)
        self.schedule = schedule
        self.d_u, self.d_x = self.K.shape

    def direction(self, rng: np.random.Generator) -> np.ndarray:
        return sample_sphere(self.d_u, self.d_x, rng).U

    def perturbed(self, r: float, U: np.ndarray) -> Controller:
        """K_{j,i} = K_j + r_j U_{j,i}."""
        return Controller(self.K + r * U)

    def estimate(self, final_costs: np.ndarray, directions: np.ndarray, r: float) -> np.ndarray:
        return one_point_estimate(final_costs, directions, r, self.d_x, self.d_u)

    def update(self, g: np.ndarray) -> None:
        self.K = self.K - self.schedule.eta * g


def _diagnostics(system: LqrSystem, K: np.ndarray) -> Tuple[float, Optional[np.ndarray]]:
    J = infinite_horizon_cost(system, Controller(K))
    grad = exact_policy_gradient(system, Controller(K)) if math.isfinite(J) else None
    return J, grad


def run(
    system: LqrSystem,
    K0: Controller,
    schedule: Schedule,
    T: int,
    rng,
    *,
    J_star: Optional[float] = None,
) -> RegretTrace:
    """
    Play the learner against the plant for T rounds.

    Args:
        rng: int seed or SeedStreams; noise and per-epoch directions use separate substreams
        J_star: optimal cost; computed with solve_optimal when omitted

    Returns:
        RegretTrace with exactly T costs

    Raises:
        LearnerDiverged: if some K_j is not stabilizing or the state overflows;
            the partial trace is attached
    """
    if T < 0:
        raise InvalidArgument(f"horizon must be non-negative, got {T}")
    if K0.shape != (system.d_u, system.d_x):
        raise InvalidArgument(f"K0 shape {K0.shape} does not match ({system.d_u}, {system.d_x})")
    if schedule.r0 > schedule.D0 * (1 + 1e-12):
        raise InvalidArgument(f"r0 = {schedule.r0} exceeds D0 = {schedule.D0}")

    streams: SeedStreams = as_streams(rng)
    if J_star is None:
        J_star = solve_optimal(system)[1]

    J0 = infinite_horizon_cost(system, K0)
    if not J0 <= schedule.nu / 4.0 * (1 + 1e-9):
        logger.warning("J(K0) = %.6g exceeds nu/4 = %.6g; guarantees do not apply", J0, schedule.nu / 4.0)

    learner = OnlinePolicyGradient(K0.K, schedule)
    plant = Plant(system, streams.noise())
    tau = schedule.tau

    costs = np.empty(T)
    epoch_of_step = np.empty(T, dtype=np.int64)
    subepoch_of_step = np.empty(T, dtype=np.int64)
    records: List[EpochRecord] = []
    t = 0

    def partial(reason: str) -> RegretTrace:
        return RegretTrace(
            costs=costs[:t].copy(),
            J_star=J_star,
            epoch_records=records,
            epoch_of_step=epoch_of_step[:t].copy(),
            subepoch_of_step=subepoch_of_step[:t].copy(),
            T=T,
            K_last=learner.K.copy(),
            diverged=reason,
            max_state_norm=plant.max_state_norm,
            max_cost=plant.max_cost,
        )

    for entry in epoch_plan(schedule, T):
        J_K, grad_true = _diagnostics(system, learner.K)
        if not math.isfinite(J_K):
            reason = f"K_{entry.j} is not stabilizing"
            logger.warning("run aborted: %s", reason)
            raise LearnerDiverged(entry.j, reason, partial(reason))

        dir_rng = streams.directions(entry.j)
        final_costs: List[float] = []
        directions: List[np.ndarray] = []
        epoch_end = t + entry.steps

        for i in range(entry.m):
            if t >= epoch_end:
                break
            U = learner.direction(dir_rng)
            rounds = min(tau, epoch_end - t)
            try:
                observed = plant.play(learner.perturbed(entry.r, U), rounds)
            except NumericOverflow as e:
                reason = f"state overflow: {e}"
                logger.warning("run aborted: %s", reason)
                raise LearnerDiverged(entry.j, reason, partial(reason)) from e

            costs[t:t + rounds] = observed
            epoch_of_step[t:t + rounds] = entry.j
            subepoch_of_step[t:t + rounds] = i
            t += rounds

            # A cut sub-epoch never reaches its final round
            if rounds == tau:
                final_costs.append(float(observed[-1]))
                directions.append(U)

        record = EpochRecord(
            j=entry.j,
            K=learner.K.copy(),
            r=entry.r,
            m=entry.m,
            steps=entry.steps,
            truncated=entry.truncated,
            J_K=J_K,
            final_costs=np.asarray(final_costs),
            directions=np.asarray(directions).reshape(-1, learner.d_u, learner.d_x),
            grad_true=grad_true,
            grad_err_bound=schedule.grad_error_envelope(entry.j),
        )
        if final_costs:
            record.g = learner.estimate(record.final_costs, record.directions, entry.r)
        records.append(record)

        logger.info(
            "epoch %d: r=%.4g m=%d J(K)=%.6g |g|=%.4g |grad J|=%.4g",
            entry.j, entry.r, entry.m, J_K, record.grad_est_norm, record.grad_true_norm,
        )

        if not entry.truncated and record.g is not None:
            learner.update(record.g)

    return RegretTrace(
        costs=costs,
        J_star=J_star,
        epoch_records=records,
        epoch_of_step=epoch_of_step,
        subepoch_of_step=subepoch_of_step,
        T=T,
        K_last=learner.K.copy(),
        max_state_norm=plant.max_state_norm,
        max_cost=plant.max_cost,
    )


def run_fixed(
    system: LqrSystem,
    K: Controller,
    T: int,
    rng,
    *,
    J_star: Optional[float] = None,
) -> RegretTrace:
    """Baseline: play one fixed controller for T rounds, from the same noise stream as run()."""
    streams = as_streams(rng)
    if J_star is None:
        J_star = solve_optimal(system)[1]
    J_K, grad = _diagnostics(system, K.K)

    plant = Plant(system, streams.noise())
    try:
        costs = plant.play(K, T)
    except NumericOverflow as e:
        raise LearnerDiverged(0, f"state overflow: {e}") from e

    record = EpochRecord(
        j=0, K=K.K.copy(), r=0.0, m=0, steps=T, truncated=False, J_K=J_K,
        final_costs=np.empty(0), directions=np.empty((0,) + K.shape), grad_true=grad,
    )
    return RegretTrace(
        costs=costs,
        J_star=J_star,
        epoch_records=[record],
        epoch_of_step=np.zeros(T, dtype=np.int64),
        subepoch_of_step=np.zeros(T, dtype=np.int64),
        T=T,
        K_last=K.K.copy(),
        max_state_norm=plant.max_state_norm,
        max_cost=plant.max_cost,
    )
