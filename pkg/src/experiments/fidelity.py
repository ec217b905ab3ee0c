"""
Accuracy of the one-point gradient estimate against ∇J.

Two cost sources for the estimate:
- exact: c_i = J(K + rU_i), the τ → ∞ idealisation, computed in batch
- simulated: c_i is the final-round cost after playing K + rU_i for τ rounds
  on the plant, with the state carried over as in the learner
"""

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from console import get_logger
from errors import InvalidArgument
from lqr.analytics import batch_cost, exact_policy_gradient, infinite_horizon_cost
from lqr.system import Controller, LqrSystem
from rng import as_streams
from simulator.rollout import Plant
from smoothing.sphere import one_point_estimate, sample_sphere_batch
from .fitting import ScalingFit, scaling_fit
from .sweep import ExperimentKind

logger = get_logger("experiments.fidelity")

# Points whose mean error is within this factor of the bias floor are left out of the decay fit
FLOOR_FACTOR = 3.0


@dataclass
class FidelityPoint:
    m: int
    mean_error: float
    stderr: float
    errors: np.ndarray


@dataclass
class FidelityReport:
    """Estimate error per m, its decay exponent and the smoothing bias floor."""
    system_name: str
    r: float
    exact_costs: bool
    grad_norm: float
    points: List[FidelityPoint]
    decay: ScalingFit
    bias_floor: float
    fitted_ms: List[int] = field(default_factory=list)

    kind = ExperimentKind.GRADIENT_FIDELITY

    @property
    def decay_exponent(self) -> float:
        return self.decay.slope


def _simulated_costs(system: LqrSystem, K: np.ndarray, r: float, U: np.ndarray, tau: int,
                     rng: np.random.Generator) -> np.ndarray:
    plant = Plant(system, rng)
    out = np.empty(U.shape[0])
    for i in range(U.shape[0]):
        out[i] = plant.play(Controller(K + r * U[i]), tau)[-1]
    return out


def smoothing_bias(system: LqrSystem, K: Controller, r: float, m: int, rng: np.random.Generator) -> float:
    """
    ‖∇J_r(K) − ∇J(K)‖_F, with ∇J_r estimated from m antithetic pairs of exact costs.

    The antithetic form (d/2r)(J(K+rU) − J(K−rU))U has the same mean as the
    one-point estimate and a far smaller variance.
    """
    d = system.d_u * system.d_x
    U = sample_sphere_batch(m, system.d_u, system.d_x, rng)
    diff = batch_cost(system, K.K[None] + r * U) - batch_cost(system, K.K[None] - r * U)
    if not np.all(np.isfinite(diff)):
        raise InvalidArgument(f"radius {r} leaves the stabilizing set around K")
    g = d / (2.0 * r * m) * np.tensordot(diff, U, axes=(0, 0))
    return float(np.linalg.norm(g - exact_policy_gradient(system, K)))


def gradient_fidelity(
    system: LqrSystem,
    K: Controller,
    r: float,
    m_grid: Sequence[int],
    tau: int,
    rng,
    repetitions: int = 20,
    exact_costs: bool = True,
    bias_samples: int = 20000,
) -> FidelityReport:
    """
    ‖g − ∇J(K)‖_F over `repetitions` independent estimates for each m.

    The decay exponent in m is fitted on the points that sit clearly above
    the bias floor.
    """
    streams = as_streams(rng)
    if not r > 0:
        raise InvalidArgument(f"radius must be positive, got {r}")
    if repetitions < 2:
        raise InvalidArgument("need at least two repetitions")
    if not math.isfinite(infinite_horizon_cost(system, K)):
        raise InvalidArgument("gradient fidelity is measured at a stabilizing controller")

    grad = exact_policy_gradient(system, K)
    bias = smoothing_bias(system, K, r, bias_samples, streams.generator(0))

    points: List[FidelityPoint] = []
    for k, m in enumerate(m_grid):
        m = int(m)
        errors = np.empty(repetitions)
        for rep in range(repetitions):
            gen = streams.generator(1, k, rep)
            U = sample_sphere_batch(m, system.d_u, system.d_x, gen)
            if exact_costs:
                costs = batch_cost(system, K.K[None] + r * U)
            else:
                costs = _simulated_costs(system, K.K, r, U, tau, gen)
            g = one_point_estimate(costs, U, r, system.d_x, system.d_u)
            errors[rep] = float(np.linalg.norm(g - grad))
        points.append(FidelityPoint(
            m=m,
            mean_error=float(errors.mean()),
            stderr=float(errors.std(ddof=1) / math.sqrt(repetitions)),
            errors=errors,
        ))
        logger.debug("m=%d: mean error %.4g", m, points[-1].mean_error)

    above = [p for p in points if p.mean_error > FLOOR_FACTOR * bias]
    if len(above) < 2:
        logger.warning("fewer than two points above the bias floor %.3g; fitting all points", bias)
        above = points
    decay = scaling_fit([p.m for p in above], [p.errors for p in above], streams.generator(2))

    return FidelityReport(
        system_name=system.name,
        r=float(r),
        exact_costs=exact_costs,
        grad_norm=float(np.linalg.norm(grad)),
        points=points,
        decay=decay,
        bias_floor=bias,
        fitted_ms=[p.m for p in above],
    )
