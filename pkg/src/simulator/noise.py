"""
Process-noise generation, including the Gaussian-to-bounded reduction.

Gaussian noise is made bounded by conditioning on the symmetric ellipsoid
S = {w : ‖Σ_w^{-1/2} w‖ ≤ radius}. Rejection keeps every sample inside S and,
since S is symmetric, keeps the law zero-mean.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import InvalidArgument
from lqr.system import NoiseKind, NoiseModel, symmetric_sqrt

# Accepted fraction is ≥ 1 − δ/T, so a handful of rounds always suffices.
_MAX_REJECTION_ROUNDS = 1000


@dataclass(frozen=True)
class TruncationParams:
    """Bounded-noise parameters of a truncated Gaussian."""
    W_bound: float
    sigma_sq_eff: float
    radius: float  # whitened truncation radius √(5 d_x log(T/δ))
    delta: float
    T: float


def truncation_params(Sigma_w, T: float, delta: float) -> TruncationParams:
    """
    W = √(5 d_x λ_max(Σ_w) log(T/δ)), σ²_eff = λ_min(Σ_w)(1 − √(3δ/T)).

    Raises:
        InvalidArgument: if δ ∉ (0, 1/3) or T/δ ≤ e
    """
    Sigma_w = np.atleast_2d(np.asarray(Sigma_w, dtype=float))
    if not 0 < delta < 1.0 / 3.0:
        raise InvalidArgument(f"delta must lie in (0, 1/3), got {delta}")
    if T <= 0 or T / delta <= math.e:
        raise InvalidArgument(f"T/delta must exceed e, got T={T}, delta={delta}")

    eig = np.linalg.eigvalsh((Sigma_w + Sigma_w.T) / 2)
    d_x = Sigma_w.shape[0]
    log_term = math.log(T / delta)
    radius = math.sqrt(5.0 * d_x * log_term)

    return TruncationParams(
        W_bound=math.sqrt(5.0 * d_x * float(eig.max()) * log_term),
        sigma_sq_eff=float(eig.min()) * (1.0 - math.sqrt(3.0 * delta / T)),
        radius=radius,
        delta=float(delta),
        T=float(T),
    )


def gaussian_norm_radius(Sigma_w, delta: float) -> float:
    """‖w‖ ≤ √(5 tr(Σ_w) log(1/δ)) with probability ≥ 1 − δ, for δ ∈ (0, 1/e)."""
    if not 0 < delta < 1.0 / math.e:
        raise InvalidArgument(f"delta must lie in (0, 1/e), got {delta}")
    return math.sqrt(5.0 * float(np.trace(np.atleast_2d(Sigma_w))) * math.log(1.0 / delta))


def gaussian_noise_model(Sigma_w, T: float, delta: float) -> NoiseModel:
    """Truncated Gaussian NoiseModel with W and σ² from truncation_params."""
    params = truncation_params(Sigma_w, T, delta)
    return NoiseModel(
        kind=NoiseKind.TRUNCATED_GAUSSIAN,
        covariance=np.atleast_2d(np.asarray(Sigma_w, dtype=float)),
        sigma_sq=params.sigma_sq_eff,
        bound_W=params.W_bound,
        truncation_radius=params.radius,
    )


def _sample_unit_ball(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = rng.random((n, 1)) ** (1.0 / d)
    return g / norms * radii


def draw_noise_batch(
    model: NoiseModel,
    n: int,
    rng: np.random.Generator,
    root: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    n i.i.d. noise vectors, shape (n, d_x).

    Args:
        root: precomputed Σ_w^{1/2}, for callers drawing many small batches
    """
    d = model.dim
    if model.kind == NoiseKind.DISABLED or n == 0:
        return np.zeros((n, d))

    if root is None:
        root = symmetric_sqrt(model.covariance)

    if model.kind == NoiseKind.BOUNDED_IID:
        # Uniform ball has covariance I/(d+2)
        return _sample_unit_ball(n, d, rng) @ root.T * math.sqrt(d + 2)

    radius_sq = model.truncation_radius ** 2
    accepted = np.empty((0, d))
    rounds = 0
    while accepted.shape[0] < n:
        rounds += 1
        if rounds > _MAX_REJECTION_ROUNDS:
            raise InvalidArgument(f"truncation radius {model.truncation_radius} rejects almost every draw")
        z = rng.standard_normal((n - accepted.shape[0], d))
        keep = np.einsum("ij,ij->i", z, z) <= radius_sq
        accepted = np.vstack([accepted, z[keep]])

    return accepted @ root.T


def draw_noise(model: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """One noise vector of dimension d_x."""
    return draw_noise_batch(model, 1, rng)[0]
