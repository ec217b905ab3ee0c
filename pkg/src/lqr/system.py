"""
LQR plant and controller types.

Provides:
- NoiseKind / NoiseModel: process-noise law of the plant
- LqrSystem: (A, B, Q, R) plus noise, the ground truth hidden from the learner
- Controller: linear feedback gain u = Kx
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from console import get_logger
from errors import InvalidArgument

logger = get_logger("lqr.system")

SYMMETRY_TOL = 1e-10


class NoiseKind(Enum):
    """Process-noise law."""
    BOUNDED_IID = "bounded_iid"
    TRUNCATED_GAUSSIAN = "truncated_gaussian"
    DISABLED = "disabled"  # deterministic plant, diagnostics only


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(value, dtype=float))
    if arr.ndim != 2:
        raise InvalidArgument(f"{name} must be a matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} has non-finite entries")
    return arr


def _check_symmetric(M: np.ndarray, name: str) -> None:
    if M.shape[0] != M.shape[1]:
        raise InvalidArgument(f"{name} must be square, got {M.shape}")
    if not np.allclose(M, M.T, atol=SYMMETRY_TOL * max(1.0, np.abs(M).max())):
        raise InvalidArgument(f"{name} must be symmetric")


def symmetric_sqrt(M: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition (negative rounding clipped)."""
    eigvals, eigvecs = np.linalg.eigh((M + M.T) / 2)
    return (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T


@dataclass(frozen=True)
class NoiseModel:
    """
    Zero-mean i.i.d. process noise.

    BOUNDED_IID draws Σ_w^{1/2}·√(d+2)·b with b uniform on the unit ball, so
    E[wwᵀ] = Σ_w and ‖w‖ ≤ √((d+2)λ_max). TRUNCATED_GAUSSIAN draws N(0, Σ_w)
    conditioned on ‖Σ_w^{-1/2} w‖ ≤ truncation_radius.
    """
    kind: NoiseKind
    covariance: np.ndarray
    sigma_sq: float
    bound_W: float
    truncation_radius: Optional[float] = None

    def __post_init__(self):
        cov = _as_matrix(self.covariance, "noise covariance")
        _check_symmetric(cov, "noise covariance")
        object.__setattr__(self, "covariance", cov)

        if self.kind == NoiseKind.DISABLED:
            return

        eig_min = float(np.linalg.eigvalsh(cov).min())
        if self.sigma_sq <= 0:
            raise InvalidArgument(f"sigma_sq must be positive, got {self.sigma_sq}")
        if eig_min < self.sigma_sq * (1 - 1e-12):
            raise InvalidArgument(
                f"lambda_min(covariance) = {eig_min:.6g} is below sigma_sq = {self.sigma_sq:.6g}"
            )
        if self.bound_W <= 0:
            raise InvalidArgument(f"bound_W must be positive, got {self.bound_W}")

        if self.kind == NoiseKind.TRUNCATED_GAUSSIAN:
            if self.truncation_radius is None or self.truncation_radius <= 0:
                raise InvalidArgument("truncated Gaussian noise needs a positive truncation_radius")
            reach = self.truncation_radius * np.sqrt(self.max_eig)
            if reach > self.bound_W * (1 + 1e-12):
                raise InvalidArgument(f"truncation set reaches norm {reach:.6g} > bound_W {self.bound_W:.6g}")
        elif self.kind == NoiseKind.BOUNDED_IID:
            reach = np.sqrt((self.dim + 2) * self.max_eig)
            if reach > self.bound_W * (1 + 1e-12):
                raise InvalidArgument(f"uniform-ball noise reaches norm {reach:.6g} > bound_W {self.bound_W:.6g}")

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    @property
    def max_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.covariance).max())

    @property
    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.covariance).min())

    @classmethod
    def bounded_uniform(cls, covariance) -> "NoiseModel":
        """Uniform-on-ball law matched to `covariance`, with the tightest W."""
        cov = _as_matrix(covariance, "noise covariance")
        eig = np.linalg.eigvalsh((cov + cov.T) / 2)
        return cls(
            kind=NoiseKind.BOUNDED_IID,
            covariance=cov,
            sigma_sq=float(eig.min()),
            bound_W=float(np.sqrt((cov.shape[0] + 2) * eig.max())),
        )

    @classmethod
    def disabled(cls, dim: int) -> "NoiseModel":
        return cls(kind=NoiseKind.DISABLED, covariance=np.zeros((dim, dim)), sigma_sq=0.0, bound_W=0.0)


@dataclass(frozen=True)
class LqrSystem:
    """
    Linear plant x' = Ax + Bu + w with stage cost xᵀQx + uᵀRu.

    Q and R must be symmetric positive definite. The normalisation
    Q, R ⪯ I assumed by the regularity constants is reported, not enforced.
    """
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    noise: NoiseModel
    name: str = "system"

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        Q = _as_matrix(self.Q, "Q")
        R = _as_matrix(self.R, "R")

        d_x = A.shape[0]
        if A.shape != (d_x, d_x):
            raise InvalidArgument(f"A must be square, got {A.shape}")
        if B.shape[0] != d_x:
            raise InvalidArgument(f"B has {B.shape[0]} rows, expected {d_x}")
        d_u = B.shape[1]
        if Q.shape != (d_x, d_x):
            raise InvalidArgument(f"Q must be {d_x}x{d_x}, got {Q.shape}")
        if R.shape != (d_u, d_u):
            raise InvalidArgument(f"R must be {d_u}x{d_u}, got {R.shape}")
        if self.noise.dim != d_x:
            raise InvalidArgument(f"noise dimension {self.noise.dim} does not match d_x = {d_x}")

        for M, name in ((Q, "Q"), (R, "R")):
            _check_symmetric(M, name)
            if np.linalg.eigvalsh(M).min() <= 0:
                raise InvalidArgument(f"{name} must be positive definite")

        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

        if not self.is_normalized:
            logger.warning(
                "%s: Q, R are not bounded by the identity (max eigenvalues %.4g, %.4g); "
                "regularity constants assume 0 < Q, R <= I",
                self.name, np.linalg.eigvalsh(Q).max(), np.linalg.eigvalsh(R).max(),
            )

    @property
    def d_x(self) -> int:
        return self.A.shape[0]

    @property
    def d_u(self) -> int:
        return self.B.shape[1]

    @property
    def Sigma_w(self) -> np.ndarray:
        return self.noise.covariance

    @property
    def alpha0(self) -> float:
        """Smallest eigenvalue over Q and R."""
        return float(min(np.linalg.eigvalsh(self.Q).min(), np.linalg.eigvalsh(self.R).min()))

    @property
    def is_normalized(self) -> bool:
        return bool(
            np.linalg.eigvalsh(self.Q).max() <= 1 + 1e-12 and np.linalg.eigvalsh(self.R).max() <= 1 + 1e-12
        )

    def with_noise(self, noise: NoiseModel) -> "LqrSystem":
        return LqrSystem(self.A, self.B, self.Q, self.R, noise, self.name)


@dataclass(frozen=True)
class Controller:
    """Linear state feedback u = Kx."""
    K: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self):
        K = _as_matrix(self.K, "K")
        object.__setattr__(self, "K", K)

    @property
    def shape(self):
        return self.K.shape

    def perturbed(self, radius: float, direction: np.ndarray) -> "Controller":
        return Controller(self.K + radius * direction)

    def distance(self, other: "Controller") -> float:
        """Frobenius distance between gains."""
        return float(np.linalg.norm(self.K - other.K, "fro"))

    @classmethod
    def zeros(cls, d_u: int, d_x: int) -> "Controller":
        return cls(np.zeros((d_u, d_x)))
