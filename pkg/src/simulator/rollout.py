"""
Stochastic rollouts of the true plant.

Provides:
- RolloutState / step: one transition x' = Ax + Bu + w with u = Kx
- rollout_fixed: n steps under a fixed controller
- Plant: stateful plant that reports only scalar costs to its caller
- covariance_recursion / mixing_envelope: exact state-covariance dynamics
- write_trajectory_csv: trajectory dump
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from errors import NumericOverflow
from lqr.system import Controller, LqrSystem, symmetric_sqrt
from tables import write_csv
from .noise import draw_noise, draw_noise_batch

OVERFLOW_NORM = 1e12


@dataclass
class RolloutState:
    """Plant state at step t and the cost paid at the previous step."""
    x: np.ndarray
    t: int = 0
    cost_last: float = 0.0

    @classmethod
    def origin(cls, d_x: int) -> "RolloutState":
        return cls(x=np.zeros(d_x))


def _stage_cost(system: LqrSystem, x: np.ndarray, u: np.ndarray) -> float:
    return float(x @ system.Q @ x + u @ system.R @ u)


def step(
    system: LqrSystem,
    K: Controller,
    state: RolloutState,
    rng: np.random.Generator,
    w: Optional[np.ndarray] = None,
) -> RolloutState:
    """
    Apply u = Kx, pay c = xᵀQx + uᵀRu and move to x' = Ax + Bu + w.

    Args:
        w: explicit noise realisation; drawn from the system's noise model if None

    Raises:
        NumericOverflow: if ‖x'‖ > 1e12
    """
    x = state.x
    u = K.K @ x
    cost = _stage_cost(system, x, u)
    if w is None:
        w = draw_noise(system.noise, rng)
    x_next = system.A @ x + system.B @ u + w

    norm = float(np.linalg.norm(x_next))
    if not norm <= OVERFLOW_NORM:
        raise NumericOverflow(state.t + 1, norm)

    return RolloutState(x=x_next, t=state.t + 1, cost_last=cost)


def rollout_fixed(
    system: LqrSystem,
    K: Controller,
    x0: Optional[np.ndarray],
    n_steps: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Play a fixed controller for n_steps.

    Returns:
        states of shape (n_steps + 1, d_x) starting at x0 (origin if None),
        costs of shape (n_steps,)
    """
    x0 = np.zeros(system.d_x) if x0 is None else np.asarray(x0, dtype=float)
    noise = draw_noise_batch(system.noise, n_steps, rng)

    states = np.empty((n_steps + 1, system.d_x))
    costs = np.empty(n_steps)
    states[0] = x0
    state = RolloutState(x=x0)
    for t in range(n_steps):
        state = step(system, K, state, rng, w=noise[t])
        states[t + 1] = state.x
        costs[t] = state.cost_last
    return states, costs


class Plant:
    """
    The true system as seen by an online learner.

    The learner hands over a controller and a number of rounds and gets back
    the per-round costs; the matrices and the state stay inside. The state
    carries over between calls.
    """

    def __init__(self, system: LqrSystem, rng: np.random.Generator, x0: Optional[np.ndarray] = None):
        self._system = system
        self._rng = rng
        self._noise_root = symmetric_sqrt(system.noise.covariance)
        self._x = np.zeros(system.d_x) if x0 is None else np.asarray(x0, dtype=float).copy()
        self.t = 0
        self.max_state_norm = 0.0
        self.max_cost = 0.0

    def play(self, K: Controller, rounds: int) -> np.ndarray:
        """
        Play K for `rounds` steps and return the cost of each round.

        Raises:
            NumericOverflow: if the state explodes
        """
        A, B, Q, R = self._system.A, self._system.B, self._system.Q, self._system.R
        gain = K.K
        noise = draw_noise_batch(self._system.noise, rounds, self._rng, root=self._noise_root)
        costs = np.empty(rounds)
        x = self._x
        limit_sq = OVERFLOW_NORM ** 2

        for i in range(rounds):
            u = gain @ x
            costs[i] = x @ Q @ x + u @ R @ u
            x = A @ x + B @ u + noise[i]
            norm_sq = float(x @ x)
            if not norm_sq <= limit_sq:
                raise NumericOverflow(self.t + i + 1, math.sqrt(norm_sq) if math.isfinite(norm_sq) else math.inf)
            if norm_sq > self.max_state_norm ** 2:
                self.max_state_norm = math.sqrt(norm_sq)

        self._x = x
        self.t += rounds
        if rounds:
            self.max_cost = max(self.max_cost, float(costs.max()))
        return costs


def covariance_recursion(system: LqrSystem, K: Controller, Sigma0: np.ndarray, n_steps: int) -> List[np.ndarray]:
    """Σ_{t+1} = Σ_w + M Σ_t Mᵀ with M = A + BK; returns [Σ_0, ..., Σ_n]."""
    M = system.A + system.B @ K.K
    out = [np.asarray(Sigma0, dtype=float)]
    for _ in range(n_steps):
        out.append(system.Sigma_w + M @ out[-1] @ M.T)
    return out


def mixing_envelope(kappa: float, gamma: float, t: int, initial_gap: float) -> float:
    """κ² e^{−2γt} ‖x₀x₀ᵀ − Σ_K‖: bound on ‖E[x_t x_tᵀ] − Σ_K‖."""
    return kappa ** 2 * math.exp(-2.0 * gamma * t) * initial_gap


def write_trajectory_csv(
    path: Path,
    system: LqrSystem,
    K: Controller,
    states: np.ndarray,
    costs: np.ndarray,
) -> Path:
    """CSV with columns t, x[0..d_x), u[0..d_u), cost."""
    header = ["t"] + [f"x{i}" for i in range(system.d_x)] + [f"u{i}" for i in range(system.d_u)] + ["cost"]
    rows = ([t, *states[t], *(K.K @ states[t]), float(cost)] for t, cost in enumerate(costs))
    return write_csv(Path(path), header, rows)
