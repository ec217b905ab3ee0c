"""
Corrupted gradient descent against its guaranteed envelope.

Every objective in the zoo is PL and smooth with known (μ, β, G, D₀, f★).
Each corruption pattern is run at half the admissible corruption cap; an
extra oversized pattern (beyond the cap) is run and reported as out of
contract, without asserting anything.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from console import get_logger
from errors import DivergenceDetected
from rng import as_streams
from smoothing.corrupted_gd import CorruptionSpec, corrupted_gd, step_size_cap
from .sweep import ExperimentKind

logger = get_logger("experiments.gd_suite")


@dataclass(frozen=True)
class PLObjective:
    """Synthetic PL objective with its constants."""
    name: str
    f: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    mu: float
    beta: float
    G: float
    D0: float
    f_star: float
    x0: np.ndarray
    f_bar: float


def quadratic(name: str, H: np.ndarray, x0: np.ndarray) -> PLObjective:
    """½ xᵀHx: μ = 2λ_min, β = λ_max, G = √(2 f̄ λ_max) on {f ≤ f̄}."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    eig = np.linalg.eigvalsh(H)
    x0 = np.asarray(x0, dtype=float)
    f = lambda x: 0.5 * float(x @ H @ x)
    f_bar = 2.0 * f(x0) + 1.0
    return PLObjective(
        name=name,
        f=f,
        grad=lambda x: H @ x,
        mu=2.0 * float(eig.min()),
        beta=float(eig.max()),
        G=math.sqrt(2.0 * f_bar * float(eig.max())),
        D0=math.inf,
        f_star=0.0,
        x0=x0,
        f_bar=f_bar,
    )


def sine_perturbed() -> PLObjective:
    """x² + 3 sin²x: non-convex, PL with μ = 1/32, β = 8."""
    x0 = np.array([2.5])
    f = lambda x: float(x[0] ** 2 + 3.0 * math.sin(x[0]) ** 2)
    f_bar = 2.0 * f(x0) + 1.0
    return PLObjective(
        name="sine_1d",
        f=f,
        grad=lambda x: np.array([2.0 * x[0] + 3.0 * math.sin(2.0 * x[0])]),
        mu=1.0 / 32.0,
        beta=8.0,
        G=2.0 * math.sqrt(f_bar) + 3.0,
        D0=math.inf,
        f_star=0.0,
        x0=x0,
        f_bar=f_bar,
    )


def default_zoo(rng: np.random.Generator) -> List[PLObjective]:
    """Quadratics in 1, 2, 5 and 10 dimensions, an ill-conditioned one and x² + 3 sin²x."""
    zoo = [quadratic("quad_1d", [[1.0]], [3.0])]
    for d in (2, 5, 10):
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        eig = np.geomspace(0.5, 4.0, d)
        zoo.append(quadratic(f"quad_{d}d", Q @ np.diag(eig) @ Q.T, rng.standard_normal(d) * 2.0))
    zoo.append(quadratic("quad_2d_illcond", np.diag([0.01, 1.0]), [5.0, 5.0]))
    zoo.append(sine_perturbed())
    return zoo


class Pattern(Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    DECAYING = "decaying"
    ADVERSARIAL = "adversarial"
    OVERSIZED = "oversized"


IN_CONTRACT = (Pattern.ZERO, Pattern.CONSTANT, Pattern.DECAYING, Pattern.ADVERSARIAL)


def corruption_cap(obj: PLObjective) -> float:
    """min(G, √((f̄ − f★)μ)/2)."""
    return min(obj.G, math.sqrt((obj.f_bar - obj.f_star) * obj.mu) / 2.0)


def corruption_magnitudes(pattern: Pattern, eps0: float, rho: float, steps: int) -> np.ndarray:
    t = np.arange(steps)
    if pattern == Pattern.ZERO:
        return np.zeros(steps)
    if pattern == Pattern.DECAYING:
        return eps0 * rho ** (t / 2.0)
    return np.full(steps, eps0)


def _oracle(obj: PLObjective, pattern: Pattern, eps: np.ndarray, rng: np.random.Generator):
    dim = obj.x0.shape[0]
    fixed = rng.standard_normal(dim)
    fixed /= np.linalg.norm(fixed)

    def oracle(t: int, x: np.ndarray) -> np.ndarray:
        g = obj.grad(x)
        if eps[t] == 0:
            return g
        if pattern in (Pattern.ADVERSARIAL, Pattern.OVERSIZED):
            # Oppose the true gradient so each step makes as little progress as allowed
            norm = np.linalg.norm(g)
            direction = -g / norm if norm > 0 else fixed
        elif pattern == Pattern.CONSTANT:
            direction = fixed
        else:
            v = rng.standard_normal(dim)
            direction = v / np.linalg.norm(v)
        return g + eps[t] * direction

    return oracle


@dataclass
class GdSuiteRow:
    objective: str
    pattern: Pattern
    in_contract: bool
    eps0: float
    eta: float
    steps: int
    violations: int
    first_violation: Optional[int]
    final_gap: float
    final_bound: float
    diverged: bool = False
    gaps: np.ndarray = field(default_factory=lambda: np.empty(0))
    bounds: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass
class GdSuiteReport:
    rows: List[GdSuiteRow]

    kind = ExperimentKind.CORRUPTED_GD_BOUND

    @property
    def total_violations(self) -> int:
        return sum(r.violations + int(r.diverged) for r in self.rows if r.in_contract)

    @property
    def passed(self) -> bool:
        return self.total_violations == 0

    def failures(self) -> List[str]:
        """(objective, pattern, step) of every in-contract violation."""
        return [
            f"{r.objective}/{r.pattern.value} at step {r.first_violation}"
            for r in self.rows if r.in_contract and (r.violations or r.diverged)
        ]


def corrupted_gd_bound_suite(
    zoo: Optional[Sequence[PLObjective]],
    rng,
    steps: int = 10_000,
    corruption_fraction: float = 0.5,
    oversize_factor: float = 2.0,
) -> GdSuiteReport:
    """
    Run every objective under every pattern and check the envelope at every step.

    η is the largest step the guarantee allows, min(1/β, 4/μ, D₀/2G).
    """
    streams = as_streams(rng)
    zoo = list(zoo) if zoo is not None else default_zoo(streams.generator(0))
    rows: List[GdSuiteRow] = []

    for i, obj in enumerate(zoo):
        eta = step_size_cap(obj.beta, obj.mu, obj.G, obj.D0)
        rho = 1.0 - obj.mu * eta / 3.0
        cap = corruption_cap(obj)

        for k, pattern in enumerate(Pattern):
            in_contract = pattern in IN_CONTRACT
            eps0 = cap * (corruption_fraction if in_contract else oversize_factor)
            eps = corruption_magnitudes(pattern, eps0, rho, steps)
            spec = CorruptionSpec(eps, rho)
            oracle = _oracle(obj, pattern, eps, streams.generator(1, i, k))

            try:
                report = corrupted_gd(
                    oracle, obj.x0, eta, steps,
                    mu=obj.mu, f_monitor=obj.f, f_star=obj.f_star,
                    corruption=spec, f_bar=obj.f_bar,
                )
            except DivergenceDetected as e:
                if in_contract:
                    logger.warning("%s/%s left its sub-level set: %s", obj.name, pattern.value, e)
                rows.append(GdSuiteRow(
                    objective=obj.name, pattern=pattern, in_contract=in_contract, eps0=eps0,
                    eta=eta, steps=steps, violations=0, first_violation=e.step,
                    final_gap=e.value - obj.f_star, final_bound=math.nan, diverged=True,
                ))
                continue

            bad = report.violations() if in_contract else np.empty(0, dtype=int)
            if bad.size:
                logger.warning("%s/%s: %d envelope violation(s), first at step %d",
                               obj.name, pattern.value, bad.size, int(bad[0]))
            rows.append(GdSuiteRow(
                objective=obj.name,
                pattern=pattern,
                in_contract=in_contract,
                eps0=eps0,
                eta=eta,
                steps=steps,
                violations=int(bad.size),
                first_violation=int(bad[0]) if bad.size else None,
                final_gap=float(report.gaps[-1]),
                final_bound=float(report.bounds[-1]),
                gaps=report.gaps,
                bounds=report.bounds,
            ))

    return GdSuiteReport(rows=rows)
