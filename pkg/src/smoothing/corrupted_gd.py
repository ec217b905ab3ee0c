"""
Gradient descent with a corrupted gradient oracle.

x_{t+1} = x_t − η g_t, where ‖g_t − ∇f(x_t)‖ ≤ ε_t. For a PL objective with
constants (μ, β, G, D₀) and η ≤ min(1/β, 4/μ, D₀/2G) the gap obeys

    f(x_t) − f★ ≤ max{4 ε̄²_{t−1}/μ, (1 − μη/3)^t (f(x₀) − f★)}

with ε̄²_t = max(ε_t², (1 − μη/3) ε̄²_{t−1}) the decayed running maximum.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from console import get_logger
from errors import DivergenceDetected, InvalidArgument

logger = get_logger("smoothing.corrupted_gd")

GradOracle = Callable[[int, np.ndarray], np.ndarray]


def effective_corruption_sq(eps: Sequence[float], rho: float) -> np.ndarray:
    """ε̄_t² by the O(1) recurrence ε̄_t² = max(ε_t², ρ ε̄_{t−1}²)."""
    eps = np.asarray(eps, dtype=float)
    out = np.empty_like(eps)
    running = 0.0
    for t, e in enumerate(eps):
        running = max(e * e, rho * running)
        out[t] = running
    return out


@dataclass
class CorruptionSpec:
    """Per-step corruption magnitudes and the decay factor ρ = 1 − μη/3."""
    eps: Sequence[float]
    rho: float

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        if np.any(self.eps < 0):
            raise InvalidArgument("corruption magnitudes must be non-negative")
        if not 0 < self.rho <= 1:
            raise InvalidArgument(f"decay factor must lie in (0, 1], got {self.rho}")

    @property
    def eps_bar_sq(self) -> np.ndarray:
        return effective_corruption_sq(self.eps, self.rho)

    def within_cap(self, G: float, f_bar: float, f_star: float, mu: float) -> bool:
        """ε_t ≤ min(G, √((f̄ − f★)μ)/2) for every t."""
        cap = min(G, math.sqrt(max(f_bar - f_star, 0.0) * mu) / 2.0)
        return bool(np.all(self.eps <= cap * (1 + 1e-12)))


@dataclass
class GdReport:
    """Trajectory of corrupted gradient descent and its guaranteed envelope."""
    iterates: List[np.ndarray]
    values: np.ndarray
    bounds: np.ndarray
    f_star: float
    eta: float
    mu: float
    eps_bar_sq: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def gaps(self) -> np.ndarray:
        return self.values - self.f_star

    def violations(self, rel_tol: float = 1e-9) -> np.ndarray:
        """Steps where f(x_t) − f★ exceeds the envelope."""
        slack = rel_tol * np.abs(self.bounds) + np.finfo(float).tiny
        return np.nonzero(self.gaps > self.bounds + slack)[0]


def step_size_cap(beta: float, mu: float, G: float, D0: float) -> float:
    """min(1/β, 4/μ, D₀/2G)."""
    return min(1.0 / beta, 4.0 / mu, D0 / (2.0 * G) if G > 0 else math.inf)


def corrupted_gd(
    grad_oracle: GradOracle,
    x0,
    eta: float,
    steps: int,
    *,
    mu: float,
    f_monitor: Optional[Callable[[np.ndarray], float]] = None,
    f_star: float = 0.0,
    corruption: Optional[CorruptionSpec] = None,
    f_bar: Optional[float] = None,
) -> GdReport:
    """
    Run `steps` updates x ← x − η·grad_oracle(t, x).

    The update touches only the oracle. f_monitor, when given, is telemetry used
    to record f(x_t) and the envelope; f_bar turns sub-level escape into an
    error.

    Raises:
        DivergenceDetected: if f(x_t) > f_bar
    """
    if not eta > 0:
        raise InvalidArgument(f"step size must be positive, got {eta}")
    if steps < 0:
        raise InvalidArgument(f"steps must be non-negative, got {steps}")

    rho = 1.0 - mu * eta / 3.0
    eps = corruption.eps if corruption is not None else np.zeros(steps)
    if corruption is not None and len(eps) < steps:
        raise InvalidArgument(f"corruption sequence has {len(eps)} entries for {steps} steps")
    eps_bar_sq = effective_corruption_sq(eps[:steps], rho)

    x = np.array(x0, dtype=float)
    iterates = [x.copy()]
    values: List[float] = []

    def observe(t: int, point: np.ndarray) -> None:
        if f_monitor is None:
            return
        value = float(f_monitor(point))
        values.append(value)
        if f_bar is not None and value > f_bar:
            logger.warning("sub-level escape at step %d: f = %.6g > %.6g", t, value, f_bar)
            raise DivergenceDetected(t, value, f_bar)

    observe(0, x)
    for t in range(steps):
        x = x - eta * np.asarray(grad_oracle(t, x), dtype=float)
        iterates.append(x.copy())
        observe(t + 1, x)

    if f_monitor is None:
        return GdReport(iterates, np.empty(0), np.empty(0), f_star, eta, mu, eps_bar_sq)

    values = np.asarray(values)
    gap0 = values[0] - f_star
    ts = np.arange(steps + 1)
    bounds = rho ** ts * gap0
    # ε̄_{t−1} enters at step t; ε̄_{−1} = 0
    prior = np.concatenate([[0.0], eps_bar_sq])
    bounds = np.maximum(bounds, 4.0 * prior / mu)

    return GdReport(iterates, values, bounds, f_star, eta, mu, eps_bar_sq)
