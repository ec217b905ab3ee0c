"""
LQR-PG Simulator Module
Stochastic rollouts of the true plant and noise generation.

Exports:
- step, rollout_fixed, Plant: plant dynamics
- draw_noise, truncation_params: noise laws and the Gaussian truncation
"""

from .noise import (
    TruncationParams,
    draw_noise,
    draw_noise_batch,
    gaussian_noise_model,
    gaussian_norm_radius,
    truncation_params,
)
from .rollout import (
    Plant,
    RolloutState,
    covariance_recursion,
    mixing_envelope,
    rollout_fixed,
    step,
    write_trajectory_csv,
)

__all__ = [
    "TruncationParams",
    "draw_noise",
    "draw_noise_batch",
    "gaussian_noise_model",
    "gaussian_norm_radius",
    "truncation_params",
    "Plant",
    "RolloutState",
    "covariance_recursion",
    "mixing_envelope",
    "rollout_fixed",
    "step",
    "write_trajectory_csv",
]
