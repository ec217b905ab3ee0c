"""
Exact LQR analytics for a fixed linear controller.

Provides:
- solve_sigma / solve_P: steady covariance Σ_K and cost-to-go P_K
- infinite_horizon_cost: J(K) = tr(P_K Σ_w), +inf for unstable K
- exact_policy_gradient: ∇J(K) = 2 E_K Σ_K
- solve_optimal: K★, J★ by Riccati fixed-point iteration

Both Lyapunov-type equations X = C + M X Mᵀ are solved by fixed-point
iteration on the squared operator (X ← X + M_k X M_kᵀ, M_k ← M_k²), which sums
the same series 2^k terms at a time, followed by plain fixed-point sweeps
until the residual of the original equation is within tolerance.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from console import get_logger
from errors import InvalidArgument, NoConvergence, Unstable
from .system import Controller, LqrSystem

logger = get_logger("lqr.analytics")

DEFAULT_TOL = 1e-12
MAX_ITERATIONS = 1_000_000
STABILITY_SLACK = 1e-9


@dataclass(frozen=True)
class SteadyStateSolution:
    """Steady-state quantities of a stable controller."""
    P: np.ndarray
    Sigma: np.ndarray
    J: float


def spectral_radius(M: np.ndarray) -> float:
    """Largest eigenvalue modulus."""
    return float(np.abs(np.linalg.eigvals(M)).max())


def closed_loop(system: LqrSystem, K: Controller) -> np.ndarray:
    """A + BK, after checking the gain shape."""
    if K.shape != (system.d_u, system.d_x):
        raise InvalidArgument(f"controller shape {K.shape} does not match (d_u, d_x) = ({system.d_u}, {system.d_x})")
    return system.A + system.B @ K.K


def _require_stable(M: np.ndarray) -> float:
    rho = spectral_radius(M)
    if rho >= 1 - STABILITY_SLACK:
        raise Unstable(rho)
    return rho


def _scale(X: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(X)))


def stein_residual(X: np.ndarray, M: np.ndarray, C: np.ndarray) -> float:
    """‖X − C − M X Mᵀ‖_F."""
    return float(np.linalg.norm(X - C - M @ X @ M.T))


def _solve_stein(M: np.ndarray, C: np.ndarray, tol: float, max_iterations: int) -> np.ndarray:
    """Fixed point of X = C + M X Mᵀ for ρ(M) < 1."""
    X = C.copy()
    Mk = M.copy()
    iterations = 0

    # Squared iteration: after k steps X = Σ_{s < 2^k} M^s C M^sᵀ
    while iterations < max_iterations:
        iterations += 1
        X_next = X + Mk @ X @ Mk.T
        X_next = (X_next + X_next.T) / 2
        Mk = Mk @ Mk
        change = float(np.linalg.norm(X_next - X))
        X = X_next
        if change <= tol * _scale(X):
            break

    residual = stein_residual(X, M, C)
    while residual > tol * _scale(X) and iterations < max_iterations:
        iterations += 1
        X = C + M @ X @ M.T
        X = (X + X.T) / 2
        residual = stein_residual(X, M, C)

    if residual > tol * _scale(X):
        raise NoConvergence(iterations, residual, what="Lyapunov iteration")

    logger.debug("Lyapunov iteration converged in %d steps (residual %.2e)", iterations, residual)
    return X


def solve_sigma(
    system: LqrSystem,
    K: Controller,
    tol: float = DEFAULT_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> np.ndarray:
    """
    Steady-state covariance Σ_K = Σ_w + (A+BK) Σ_K (A+BK)ᵀ.

    Converged means ‖Σ_K − Σ_w − (A+BK)Σ_K(A+BK)ᵀ‖_F ≤ tol · max(1, ‖Σ_K‖_F),
    an absolute residual for small solutions and a relative one for large.

    Raises:
        Unstable: if ρ(A+BK) ≥ 1 − 1e-9
        NoConvergence: if the iteration budget is exhausted
    """
    M = closed_loop(system, K)
    _require_stable(M)
    return _solve_stein(M, system.Sigma_w, tol, max_iterations)


def solve_P(
    system: LqrSystem,
    K: Controller,
    tol: float = DEFAULT_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> np.ndarray:
    """
    Cost-to-go P_K = Q + KᵀRK + (A+BK)ᵀ P_K (A+BK).

    Same stopping rule as solve_sigma, residual ≤ tol · max(1, ‖P_K‖_F).

    Raises:
        Unstable: if ρ(A+BK) ≥ 1 − 1e-9
        NoConvergence: if the iteration budget is exhausted
    """
    M = closed_loop(system, K)
    _require_stable(M)
    C = system.Q + K.K.T @ system.R @ K.K
    return _solve_stein(M.T, C, tol, max_iterations)


def steady_state(system: LqrSystem, K: Controller, tol: float = DEFAULT_TOL) -> SteadyStateSolution:
    """P_K, Σ_K and J(K) together."""
    P = solve_P(system, K, tol)
    Sigma = solve_sigma(system, K, tol)
    return SteadyStateSolution(P=P, Sigma=Sigma, J=float(np.trace(P @ system.Sigma_w)))


def infinite_horizon_cost(system: LqrSystem, K: Controller, tol: float = DEFAULT_TOL) -> float:
    """J(K) = tr(P_K Σ_w); +inf when A+BK is not stable."""
    try:
        P = solve_P(system, K, tol)
    except Unstable:
        return math.inf
    except NoConvergence as e:
        logger.warning("treating K as inadmissible: %s", e)
        return math.inf
    return float(np.trace(P @ system.Sigma_w))


def batch_cost(system: LqrSystem, gains: np.ndarray, tol: float = DEFAULT_TOL, max_doublings: int = 200) -> np.ndarray:
    """
    J for a stack of gains of shape (n, d_u, d_x); +inf where unstable.

    Uses the squared iteration on Σ_K for all gains at once and
    J = tr((Q + KᵀRK) Σ_K).
    """
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 3 or gains.shape[1:] != (system.d_u, system.d_x):
        raise InvalidArgument(f"gains must have shape (n, {system.d_u}, {system.d_x}), got {gains.shape}")
    n = gains.shape[0]
    M = system.A[None, :, :] + system.B[None, :, :] @ gains
    unstable = np.abs(np.linalg.eigvals(M)).max(axis=1) >= 1 - STABILITY_SLACK
    M[unstable] = 0.0

    X = np.broadcast_to(system.Sigma_w, (n, system.d_x, system.d_x)).copy()
    Mk = M
    for _ in range(max_doublings):
        step = Mk @ X @ np.swapaxes(Mk, 1, 2)
        X = X + step
        Mk = Mk @ Mk
        scale = np.maximum(1.0, np.linalg.norm(X, axis=(1, 2)))
        if np.all(np.linalg.norm(step, axis=(1, 2)) <= tol * scale):
            break
    else:
        raise NoConvergence(max_doublings, float(np.linalg.norm(step)), what="batched Lyapunov iteration")

    C = system.Q[None, :, :] + np.swapaxes(gains, 1, 2) @ system.R[None, :, :] @ gains
    J = np.einsum("nij,nji->n", C, X)
    J[unstable] = math.inf
    return J


def exact_policy_gradient(system: LqrSystem, K: Controller, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    ∇J(K) = 2 E_K Σ_K with E_K = RK + Bᵀ P_K (A+BK).

    Raises:
        Unstable: if A+BK is not stable
    """
    P = solve_P(system, K, tol)
    Sigma = solve_sigma(system, K, tol)
    M = system.A + system.B @ K.K
    E = system.R @ K.K + system.B.T @ P @ M
    return 2.0 * E @ Sigma


def riccati_residual(system: LqrSystem, P: np.ndarray) -> float:
    A, B, Q, R = system.A, system.B, system.Q, system.R
    gain = np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
    return float(np.linalg.norm(Q + A.T @ P @ A - A.T @ P @ B @ gain - P))


def solve_optimal(
    system: LqrSystem,
    tol: float = DEFAULT_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> Tuple[Controller, float]:
    """
    Optimal controller by Riccati fixed-point iteration.

    P ← Q + AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA, started at P = Q, and
    K★ = −(R + BᵀPB)⁻¹BᵀPA.
    Stops once both the step and the Riccati residual are ≤ tol · max(1, ‖P‖_F).

    Returns:
        (K★, J★) with J★ = tr(P★ Σ_w)

    Raises:
        NoConvergence: if (A, B) is not stabilizable or the budget runs out
    """
    A, B, Q, R = system.A, system.B, system.Q, system.R
    P = Q.copy()

    for iteration in range(1, max_iterations + 1):
        gain = np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
        P_next = Q + A.T @ P @ A - A.T @ P @ B @ gain
        P_next = (P_next + P_next.T) / 2
        change = float(np.linalg.norm(P_next - P))
        P = P_next
        if not np.all(np.isfinite(P)):
            raise NoConvergence(iteration, math.inf, what="Riccati iteration")
        if change <= tol * _scale(P) and riccati_residual(system, P) <= tol * _scale(P):
            break
    else:
        raise NoConvergence(max_iterations, riccati_residual(system, P), what="Riccati iteration")

    K_star = Controller(-np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A), label="K*")
    J_star = float(np.trace(P @ system.Sigma_w))
    logger.debug("Riccati iteration converged in %d steps, J* = %.10g", iteration, J_star)
    return K_star, J_star
