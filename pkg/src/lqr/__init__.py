"""
LQR-PG Core Module
Exact LQR analytics for linear controllers.

Exports:
- LqrSystem, NoiseModel, NoiseKind, Controller: plant and policy types
- solve_sigma, solve_P, infinite_horizon_cost, exact_policy_gradient, solve_optimal
- RegularityConstants, regularity_constants, strong_stability

System files are read with lqr.loader.load_system.
"""

from .system import Controller, LqrSystem, NoiseKind, NoiseModel
from .analytics import (
    SteadyStateSolution,
    batch_cost,
    closed_loop,
    exact_policy_gradient,
    infinite_horizon_cost,
    solve_optimal,
    solve_P,
    solve_sigma,
    spectral_radius,
    steady_state,
)
from .regularity import (
    AdmissibilityStatus,
    RegularityConstants,
    StrongStability,
    auto_psi,
    constants_for_system,
    cost_bound,
    regularity_constants,
    state_bound,
    strong_stability,
)

__all__ = [
    "Controller",
    "LqrSystem",
    "NoiseKind",
    "NoiseModel",
    "SteadyStateSolution",
    "batch_cost",
    "closed_loop",
    "exact_policy_gradient",
    "infinite_horizon_cost",
    "solve_optimal",
    "solve_P",
    "solve_sigma",
    "spectral_radius",
    "steady_state",
    "AdmissibilityStatus",
    "RegularityConstants",
    "StrongStability",
    "auto_psi",
    "constants_for_system",
    "cost_bound",
    "regularity_constants",
    "state_bound",
    "strong_stability",
]
