"""
Cost of exploration as a function of the perturbation radius.

Direct cost: mean of J(K + rU) − J(K) over directions, from exact costs.
Directions come in antithetic pairs (U, −U), so first-order terms cancel in
the sample mean and the quadratic term dominates.

Switching cost: realised Σ_s (c_{i,s} − J(K_i)) per sub-epoch when the
perturbed controllers are played back to back on the plant for τ rounds each.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from console import get_logger
from errors import InvalidArgument
from lqr.analytics import batch_cost, infinite_horizon_cost
from lqr.system import Controller, LqrSystem
from rng import as_streams
from simulator.rollout import Plant
from smoothing.sphere import sample_sphere_batch
from .fitting import ScalingFit, scaling_fit
from .sweep import ExperimentKind

logger = get_logger("experiments.exploration")


@dataclass
class ExplorationPoint:
    r: float
    direct_mean: float
    switching_mean: float
    n_pairs: int
    excluded: int


@dataclass
class ExplorationResult:
    """Direct and switching exploration cost fits in r."""
    system_name: str
    J_K: float
    points: List[ExplorationPoint]
    direct: ScalingFit
    switching: Optional[ScalingFit]  # None when switching was not measured
    excluded: int = 0
    r_beyond_D0: List[float] = field(default_factory=list)

    kind = ExperimentKind.EXPLORATION_COST


def geometric_grid(low: float, high: float, n: int) -> np.ndarray:
    if not 0 < low < high or n < 2:
        raise InvalidArgument(f"need 0 < low < high and n >= 2, got ({low}, {high}, {n})")
    return np.geomspace(low, high, n)


def _switching_costs(
    system: LqrSystem,
    gains: np.ndarray,
    J_gains: np.ndarray,
    tau: int,
    rng: np.random.Generator,
) -> np.ndarray:
    plant = Plant(system, rng)
    out = np.empty(gains.shape[0])
    for i, gain in enumerate(gains):
        costs = plant.play(Controller(gain), tau)
        out[i] = float(np.sum(costs - J_gains[i]))
    return out


def exploration_cost_scaling(
    system: LqrSystem,
    K: Controller,
    r_grid: Sequence[float],
    m: int,
    tau: int,
    rng,
    D0: Optional[float] = None,
    switching: bool = True,
) -> ExplorationResult:
    """
    Fit the exponent of the exploration cost in r.

    Args:
        m: directions per radius, rounded up to an even number of antithetic pairs
        D0: admissibility radius; radii above it are reported, not refused
        switching: also measure the realised switching cost on the plant

    Raises:
        InvalidArgument: if K is not stabilizing or the grid is invalid
    """
    streams = as_streams(rng)
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size < 2 or np.any(r_grid <= 0):
        raise InvalidArgument("radius grid needs at least two positive values")
    if m < 2 or tau < 1:
        raise InvalidArgument(f"need m >= 2 and tau >= 1, got m={m}, tau={tau}")
    J_K = infinite_horizon_cost(system, K)
    if not math.isfinite(J_K):
        raise InvalidArgument("exploration is measured around a stabilizing controller")

    beyond = [float(r) for r in r_grid if D0 is not None and r > D0]
    if beyond:
        logger.warning("radii %s exceed D0 = %.4g; unstable samples are excluded", beyond, D0)

    n_pairs = (m + 1) // 2
    points: List[ExplorationPoint] = []
    direct_samples, switching_samples = [], []
    total_excluded = 0

    for k, r in enumerate(r_grid):
        U = sample_sphere_batch(n_pairs, system.d_u, system.d_x, streams.generator(0, k))
        plus = batch_cost(system, K.K[None] + r * U)
        minus = batch_cost(system, K.K[None] - r * U)
        stable = np.isfinite(plus) & np.isfinite(minus)
        excluded = int(n_pairs - stable.sum())
        total_excluded += excluded
        pair_cost = (plus[stable] + minus[stable]) / 2.0 - J_K
        direct_samples.append(pair_cost)

        if switching and stable.any():
            gains = np.empty((2 * int(stable.sum()), system.d_u, system.d_x))
            gains[0::2] = K.K[None] + r * U[stable]
            gains[1::2] = K.K[None] - r * U[stable]
            J_gains = np.empty(gains.shape[0])
            J_gains[0::2] = plus[stable]
            J_gains[1::2] = minus[stable]
            sw = _switching_costs(system, gains, J_gains, tau, streams.generator(1, k))
        else:
            sw = np.empty(0)
        switching_samples.append(sw)

        points.append(ExplorationPoint(
            r=float(r),
            direct_mean=float(pair_cost.mean()) if pair_cost.size else math.nan,
            switching_mean=float(sw.mean()) if sw.size else math.nan,
            n_pairs=int(stable.sum()),
            excluded=excluded,
        ))
        logger.debug("r=%.4g: direct %.4g, switching %.4g, excluded %d",
                     r, points[-1].direct_mean, points[-1].switching_mean, excluded)

    if total_excluded:
        logger.warning("%d unstable perturbation pair(s) excluded", total_excluded)

    fit_rng = streams.generator(2)
    return ExplorationResult(
        system_name=system.name,
        J_K=J_K,
        points=points,
        direct=scaling_fit(r_grid, direct_samples, fit_rng),
        switching=scaling_fit(r_grid, switching_samples, fit_rng) if switching else None,
        excluded=total_excluded,
        r_beyond_D0=beyond,
    )
