"""
Regularity constants of the LQR cost over the admissible set {K : J(K) ≤ ν}.

All formulas are the stated ones; no per-system tightening is attempted.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from console import get_logger
from errors import InvalidArgument
from .analytics import STABILITY_SLACK, closed_loop, infinite_horizon_cost, spectral_radius
from .system import Controller, LqrSystem

logger = get_logger("lqr.regularity")


@dataclass(frozen=True)
class RegularityConstants:
    """Derived constants for admissibility level ν."""
    nu: float
    alpha0: float
    psi: float
    sigma_sq: float
    d_x: int
    kappa: float
    gamma: float
    D0: float
    G: float
    beta: float
    mu: float
    sigma_lipschitz: float  # ‖Σ_K − Σ_K'‖ ≤ this · ‖K − K'‖
    P_lipschitz: float      # ‖P_K − P_K'‖ ≤ this · ‖K − K'‖


def regularity_constants(nu: float, alpha0: float, psi: float, sigma_sq: float, d_x: int) -> RegularityConstants:
    """
    Compute κ, γ, D₀, G, β, μ from (ν, α₀, ψ, σ², d_x).

    Raises:
        InvalidArgument: on non-positive inputs or ψ < 1
    """
    for name, value in (("nu", nu), ("alpha0", alpha0), ("psi", psi), ("sigma_sq", sigma_sq), ("d_x", d_x)):
        if not value > 0 or not math.isfinite(value):
            raise InvalidArgument(f"{name} must be positive and finite, got {value}")
    if psi < 1:
        raise InvalidArgument(f"psi must be >= 1, got {psi}")

    kappa = math.sqrt(nu / (alpha0 * sigma_sq))
    if kappa < 1:
        # ν ≥ J(K) ≥ α₀σ² for every K, so κ < 1 means ν is below any reachable cost
        logger.warning("kappa = %.4g < 1: nu is below the minimum attainable cost alpha0*sigma^2", kappa)

    return RegularityConstants(
        nu=float(nu),
        alpha0=float(alpha0),
        psi=float(psi),
        sigma_sq=float(sigma_sq),
        d_x=int(d_x),
        kappa=kappa,
        gamma=1.0 / (2.0 * kappa ** 2),
        D0=1.0 / (8.0 * psi * kappa ** 3),
        G=4.0 * psi * nu * kappa ** 7 / alpha0,
        beta=112.0 * math.sqrt(d_x) * nu * psi ** 2 * kappa ** 8 / alpha0,
        mu=4.0 * nu / kappa ** 4,
        sigma_lipschitz=8.0 * psi * nu * kappa ** 3 / alpha0,
        P_lipschitz=16.0 * psi * kappa ** 7,
    )


def auto_psi(B: np.ndarray) -> float:
    """max(1, ‖B‖₂) rounded up at the fourth decimal."""
    norm = float(np.linalg.norm(B, 2))
    return max(1.0, math.ceil(norm * 1e4 - 1e-9) / 1e4)


def constants_for_system(
    system: LqrSystem,
    K0: Controller,
    nu: Optional[float] = None,
    psi: Optional[float] = None,
) -> RegularityConstants:
    """
    Constants for a concrete plant and initial controller.

    ν defaults to 4·J(K0), so that J(K0) ≤ ν/4 holds with equality.
    """
    if nu is None:
        J0 = infinite_horizon_cost(system, K0)
        if not math.isfinite(J0):
            raise InvalidArgument("initial controller K0 is not stabilizing")
        nu = 4.0 * J0
    if psi is None:
        psi = auto_psi(system.B)
    return regularity_constants(nu, system.alpha0, psi, system.noise.sigma_sq, system.d_x)


def state_bound(consts: RegularityConstants, W: float) -> float:
    """‖x_t‖ ≤ 6κ⁴W when each admissible controller is held long enough."""
    return 6.0 * consts.kappa ** 4 * W


def cost_bound(consts: RegularityConstants, W: float) -> float:
    """c_t ≤ 36νκ⁸W²/σ² under the same switching condition."""
    return 36.0 * consts.nu * consts.kappa ** 8 * W ** 2 / consts.sigma_sq


class AdmissibilityStatus(Enum):
    ADMISSIBLE = "admissible"
    NOT_ADMISSIBLE = "not_admissible"


@dataclass(frozen=True)
class StrongStability:
    """Strong-stability certificate of one controller."""
    status: AdmissibilityStatus
    J: float
    spectral_radius: float
    kappa: Optional[float] = None
    gamma: Optional[float] = None
    certified: bool = False  # ρ(A+BK) ≤ 1 − γ(1 − 1e-9)

    def is_admissible(self) -> bool:
        return self.status == AdmissibilityStatus.ADMISSIBLE


def strong_stability(system: LqrSystem, K: Controller, consts: RegularityConstants) -> StrongStability:
    """
    (κ, γ) certificate for K when J(K) ≤ ν, else NOT_ADMISSIBLE.
    """
    J = infinite_horizon_cost(system, K)
    rho = spectral_radius(closed_loop(system, K))

    if not J <= consts.nu:
        return StrongStability(status=AdmissibilityStatus.NOT_ADMISSIBLE, J=J, spectral_radius=rho)

    certified = rho <= 1.0 - consts.gamma * (1.0 - STABILITY_SLACK)
    if not certified:
        logger.warning(
            "admissible K with spectral radius %.6g above 1 - gamma = %.6g; "
            "check that Q, R >= alpha0 I and Sigma_w >= sigma^2 I hold",
            rho, 1.0 - consts.gamma,
        )

    return StrongStability(
        status=AdmissibilityStatus.ADMISSIBLE,
        J=J,
        spectral_radius=rho,
        kappa=consts.kappa,
        gamma=consts.gamma,
        certified=certified,
    )
