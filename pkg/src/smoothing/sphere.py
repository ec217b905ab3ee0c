"""
Zeroth-order gradient machinery.

Provides:
- sample_sphere: uniform direction on the Frobenius unit sphere of d_u×d_x matrices
- one_point_estimate: (d/(m r)) Σ f(x + rU_i) U_i
- smoothed_value: Monte-Carlo value of f_r(x) = E_B[f(x + rB)], B uniform on the unit ball
"""

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from errors import InvalidArgument

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SphereDirection:
    """Unit-Frobenius-norm perturbation direction."""
    U: np.ndarray

    def __post_init__(self):
        norm = float(np.linalg.norm(self.U))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgument(f"direction must have unit Frobenius norm, got {norm}")


def sample_sphere(d_u: int, d_x: int, rng: np.random.Generator) -> SphereDirection:
    """
    Normalised matrix of i.i.d. standard normal entries.

    An all-zero draw (probability zero) is redrawn.
    """
    if d_u * d_x < 1:
        raise InvalidArgument(f"need d_u * d_x >= 1, got {d_u} x {d_x}")
    while True:
        G = rng.standard_normal((d_u, d_x))
        norm = np.linalg.norm(G)
        if norm > 0:
            return SphereDirection(G / norm)


def sample_sphere_batch(n: int, d_u: int, d_x: int, rng: np.random.Generator) -> np.ndarray:
    """n directions at once, shape (n, d_u, d_x)."""
    G = rng.standard_normal((n, d_u, d_x))
    norms = np.sqrt(np.einsum("nij,nij->n", G, G))
    zero = norms == 0
    while np.any(zero):
        G[zero] = rng.standard_normal((int(zero.sum()), d_u, d_x))
        norms = np.sqrt(np.einsum("nij,nij->n", G, G))
        zero = norms == 0
    return G / norms[:, None, None]


def sample_ball(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniform in the unit ball of R^dim: sphere point times u^(1/dim)."""
    G = rng.standard_normal((n, dim))
    norms = np.linalg.norm(G, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return G / norms * rng.random((n, 1)) ** (1.0 / dim)


def _direction_array(dirs) -> np.ndarray:
    if isinstance(dirs, np.ndarray):
        return dirs if dirs.ndim == 3 else dirs[None, ...]
    return np.stack([d.U if isinstance(d, SphereDirection) else np.asarray(d, dtype=float) for d in dirs])


def one_point_estimate(
    costs: Sequence[float],
    dirs: Union[Sequence[SphereDirection], np.ndarray],
    r: float,
    d_x: int,
    d_u: int,
) -> np.ndarray:
    """
    (d_x d_u / (m r)) Σ_i costs[i] · dirs[i].

    Raises:
        InvalidArgument: on length mismatch, m = 0 or r ≤ 0
    """
    costs = np.asarray(costs, dtype=float)
    U = _direction_array(dirs) if len(dirs) else np.empty((0, d_u, d_x))
    m = costs.shape[0]
    if m != U.shape[0]:
        raise InvalidArgument(f"{m} costs but {U.shape[0]} directions")
    if m < 1:
        raise InvalidArgument("need at least one sample")
    if not r > 0:
        raise InvalidArgument(f"smoothing radius must be positive, got {r}")
    if U.shape[1:] != (d_u, d_x):
        raise InvalidArgument(f"directions have shape {U.shape[1:]}, expected ({d_u}, {d_x})")

    return (d_x * d_u / (m * r)) * np.tensordot(costs, U, axes=(0, 0))


def smoothed_value(
    f: Callable[[np.ndarray], float],
    x,
    r: float,
    n_samples: int,
    rng: np.random.Generator,
) -> float:
    """Monte-Carlo estimate of E_B[f(x + rB)] with B uniform on the unit ball."""
    if not r > 0:
        raise InvalidArgument(f"smoothing radius must be positive, got {r}")
    if n_samples < 1:
        raise InvalidArgument("need at least one sample")

    x = np.asarray(x, dtype=float)
    points = sample_ball(n_samples, x.size, rng).reshape((n_samples,) + x.shape)
    return float(np.mean([f(x + r * b) for b in points]))
