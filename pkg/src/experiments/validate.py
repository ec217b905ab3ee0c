"""
Validation suites.

Each suite checks one family of invariants against the windows frozen in
golden.yaml and returns a SuiteResult; run_validation runs them all.
Every suite draws from its own seeded substream, so the report and its CSV
are identical between runs with the same seed.
"""

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from console import get_logger
from errors import InvalidArgument, Unstable
from lqr.analytics import (
    batch_cost,
    closed_loop,
    exact_policy_gradient,
    infinite_horizon_cost,
    solve_optimal,
    solve_P,
    solve_sigma,
    spectral_radius,
    stein_residual,
)
from lqr.regularity import constants_for_system
from lqr.system import Controller, LqrSystem
from rng import SeedStreams
from simulator.noise import draw_noise_batch, gaussian_noise_model, truncation_params
from simulator.rollout import covariance_recursion, mixing_envelope
from smoothing.sphere import sample_sphere_batch
from tables import write_csv
from .benchmarks import BENCHMARK_NAMES, all_benchmarks, benchmark, random_stable_system
from .config import golden
from .exploration import exploration_cost_scaling, geometric_grid
from .fidelity import gradient_fidelity
from .gd_suite import corrupted_gd_bound_suite
from .sweep import SuiteStatus

logger = get_logger("experiments.validate")

VALIDATION_HEADER = ["suite", "status", "metric", "threshold", "detail", "seconds"]

# finite differences lose accuracy near the stability boundary
COST_CAP = 10.0


@dataclass
class SuiteResult:
    name: str
    status: SuiteStatus
    metric: float = math.nan
    threshold: str = ""
    detail: str = ""
    seconds: float = 0.0
    artifacts: List[Any] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == SuiteStatus.PASS


@dataclass
class ValidationReport:
    suites: List[SuiteResult]
    seed: int
    quick: bool

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    @property
    def failed(self) -> List[str]:
        return [s.name for s in self.suites if not s.passed]

    def write_csv(self, path: Path) -> Path:
        """Timing is left out so the file is reproducible."""
        rows = [[s.name, s.status.value, s.metric, s.threshold, s.detail] for s in self.suites]
        return write_csv(Path(path), VALIDATION_HEADER[:-1], rows)


def _status(ok: bool) -> SuiteStatus:
    return SuiteStatus.PASS if ok else SuiteStatus.FAIL


def _random_systems(n: int, rng: np.random.Generator) -> List[LqrSystem]:
    systems = []
    for i in range(n):
        d_x, d_u = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        systems.append(random_stable_system(d_x, d_u, rng, name=f"random_{i}"))
    return systems


def _stable_gain(system: LqrSystem, center: np.ndarray, radius: float, rng: np.random.Generator,
                 max_cost: float = math.inf) -> Controller:
    """
    center + Δ with ‖Δ‖_F ≤ radius, redrawn until J is finite and ≤ max_cost.
    Falls back to center itself, which must meet the same test.

    Raises:
        Unstable: if the center is not stabilizing
        InvalidArgument: if the center is stabilizing but costs more than max_cost
    """
    def admissible(K: Controller) -> bool:
        J = infinite_horizon_cost(system, K)
        return math.isfinite(J) and J <= max_cost

    for _ in range(1000):
        U = sample_sphere_batch(1, system.d_u, system.d_x, rng)[0]
        K = Controller(center + radius * rng.random() * U)
        if admissible(K):
            return K
    fallback = Controller(center)
    if not admissible(fallback):
        if not math.isfinite(infinite_horizon_cost(system, fallback)):
            raise Unstable(spectral_radius(closed_loop(system, fallback)))
        raise InvalidArgument(f"center costs more than {max_cost:.6g}")
    logger.warning("no admissible draw within radius %.3g of the center; using the center", radius)
    return fallback


def _well_conditioned_gain(system: LqrSystem, rng: np.random.Generator) -> Controller:
    """A gain near 0 whose cost stays within COST_CAP × J(0)."""
    zero = np.zeros((system.d_u, system.d_x))
    return _stable_gain(system, zero, 0.2, rng, max_cost=COST_CAP * infinite_horizon_cost(system, Controller(zero)))


# ==================== SUITES ====================

def lyapunov_residuals(streams: SeedStreams, quick: bool) -> SuiteResult:
    """Stein residuals of Σ_K, P_K and agreement of the two cost formulas."""
    cfg = golden("lyapunov")
    rng = streams.generator(0)
    worst_residual, worst_dual = 0.0, 0.0
    for system in _random_systems(cfg["quick_systems" if quick else "systems"], rng):
        K = _well_conditioned_gain(system, rng)
        M = system.A + system.B @ K.K
        C = system.Q + K.K.T @ system.R @ K.K
        Sigma, P = solve_sigma(system, K), solve_P(system, K)
        worst_residual = max(
            worst_residual,
            stein_residual(Sigma, M, system.Sigma_w) / max(1.0, np.linalg.norm(Sigma)),
            stein_residual(P, M.T, C) / max(1.0, np.linalg.norm(P)),
        )
        J_P = float(np.trace(P @ system.Sigma_w))
        J_Sigma = float(np.trace(C @ Sigma))
        worst_dual = max(worst_dual, abs(J_P - J_Sigma) / J_P)
    ok = worst_residual <= cfg["residual"] and worst_dual <= cfg["dual_gap"]
    return SuiteResult(
        "lyapunov_residuals", _status(ok), max(worst_residual, worst_dual),
        f"residual<={cfg['residual']:g} dual<={cfg['dual_gap']:g}",
        f"residual {worst_residual:.2e}, dual gap {worst_dual:.2e}",
    )


def gradient_finite_differences(streams: SeedStreams, quick: bool) -> SuiteResult:
    """∇J against central differences on random plants."""
    cfg = golden("gradient_fd")
    rng = streams.generator(1)
    h = cfg["h"]
    worst = 0.0
    for system in _random_systems(cfg["quick_systems" if quick else "systems"], rng):
        K = _well_conditioned_gain(system, rng)
        grad = exact_policy_gradient(system, K)
        fd = np.zeros_like(grad)
        for idx in np.ndindex(*grad.shape):
            E = np.zeros_like(grad)
            E[idx] = h
            fd[idx] = (infinite_horizon_cost(system, Controller(K.K + E))
                       - infinite_horizon_cost(system, Controller(K.K - E))) / (2 * h)
        worst = max(worst, float(np.linalg.norm(fd - grad) / max(np.linalg.norm(grad), 1e-12)))
    return SuiteResult(
        "gradient_finite_differences", _status(worst <= cfg["rel_error"]), worst,
        f"<={cfg['rel_error']:g}", f"worst relative error {worst:.2e}",
    )


def optimality(streams: SeedStreams, quick: bool) -> SuiteResult:
    """Stationarity and local minimality of K★ on the benchmarks, and the scalar closed form."""
    cfg = golden("optimality")
    rng = streams.generator(2)
    n = cfg["quick_perturbations" if quick else "perturbations"]
    worst_grad, below = 0.0, 0
    for name, loaded in all_benchmarks().items():
        system = loaded.system
        K_star, J_star = solve_optimal(system)
        worst_grad = max(worst_grad, float(np.linalg.norm(exact_policy_gradient(system, K_star))))
        U = sample_sphere_batch(n, system.d_u, system.d_x, rng)
        J = batch_cost(system, K_star.K[None] + cfg["radius"] * U)
        below += int(np.sum(J < J_star * (1 - 1e-12)))

    scalar = benchmark("scalar").system
    K_star, J_star = solve_optimal(scalar)
    p_star = J_star / float(scalar.Sigma_w[0, 0])
    scalar_err = max(abs(p_star - cfg["scalar_p_star"]), abs(float(K_star.K[0, 0]) - cfg["scalar_K_star"]))

    ok = worst_grad <= cfg["grad_tol"] and below == 0 and scalar_err <= cfg["scalar_tol"]
    return SuiteResult(
        "optimality", _status(ok), worst_grad, f"grad<={cfg['grad_tol']:g}",
        f"perturbations below J*: {below}, scalar error {scalar_err:.1e}",
    )


def corrupted_gd_zoo(streams: SeedStreams, quick: bool) -> SuiteResult:
    cfg = golden("gd_suite")
    report = corrupted_gd_bound_suite(
        None, streams.child(3),
        steps=cfg["quick_steps" if quick else "steps"],
        corruption_fraction=cfg["corruption_fraction"],
        oversize_factor=cfg["oversize_factor"],
    )
    detail = "; ".join(report.failures()) or f"{len(report.rows)} runs, no violations"
    return SuiteResult(
        "corrupted_gd_zoo", _status(report.passed), float(report.total_violations), "==0", detail,
        artifacts=[report],
    )


def exploration_exponent(streams: SeedStreams, quick: bool) -> SuiteResult:
    """Exponent of the direct exploration cost in r on every benchmark."""
    cfg = golden("exploration")
    low, high = cfg["exponent"]
    slopes, results = {}, []
    for i, name in enumerate(BENCHMARK_NAMES):
        system = benchmark(name).system
        K_star, _ = solve_optimal(system)
        r_grid = geometric_grid(*cfg["r_range"][name], cfg["points"])
        result = exploration_cost_scaling(
            system, K_star, r_grid, cfg["quick_m" if quick else "m"], cfg["tau"],
            streams.child(4, i), switching=False,
        )
        slopes[name] = result.direct.slope
        results.append(result)
    ok = all(low <= s <= high for s in slopes.values())
    worst = max(slopes.values(), key=lambda s: abs(s - 2.0))
    detail = ", ".join(f"{k} {v:.3f}" for k, v in slopes.items())
    return SuiteResult("exploration_exponent", _status(ok), worst, f"[{low}, {high}]", detail, artifacts=results)


def gradient_fidelity_decay(streams: SeedStreams, quick: bool) -> SuiteResult:
    """Decay of the one-point estimate error in m at the benchmark's initial controller."""
    cfg = golden("fidelity")
    low, high = cfg["exponent"]
    loaded = benchmark(cfg["system"])
    report = gradient_fidelity(
        loaded.system, loaded.K0, cfg["r"], cfg["quick_m_grid" if quick else "m_grid"], cfg["tau"],
        streams.child(5), repetitions=cfg["repetitions"], exact_costs=True,
    )
    slope = report.decay_exponent
    ok = math.isfinite(slope) and low <= slope <= high
    return SuiteResult(
        "gradient_fidelity", _status(ok), slope, f"[{low}, {high}]",
        f"bias floor {report.bias_floor:.3g}, fitted m {report.fitted_ms}", artifacts=[report],
    )


def truncation_sampler(streams: SeedStreams, quick: bool) -> SuiteResult:
    """Truncation constants and moments of the truncated Gaussian sampler."""
    cfg = golden("truncation")
    params = truncation_params(np.eye(2), 1000, 0.01)
    params_err = max(abs(params.W_bound - cfg["W_expected"]), abs(params.sigma_sq_eff - cfg["sigma_sq_expected"]))

    model = gaussian_noise_model(np.eye(2), 1000, 0.01)
    w = draw_noise_batch(model, cfg["draws"], streams.generator(6))
    mean_norm = float(np.linalg.norm(w.mean(axis=0)))
    min_eig = float(np.linalg.eigvalsh(np.cov(w, rowvar=False)).min())
    inside = bool(np.all(np.linalg.norm(w, axis=1) <= model.truncation_radius * (1 + 1e-12)))

    ok = params_err <= cfg["params_tol"] and mean_norm <= cfg["mean_norm"] and min_eig >= model.sigma_sq and inside
    return SuiteResult(
        "truncation_sampler", _status(ok), mean_norm, f"mean<={cfg['mean_norm']:g}",
        f"params error {params_err:.1e}, min eig {min_eig:.5f} vs {model.sigma_sq:.5f}",
    )


def mixing_rate(streams: SeedStreams, quick: bool) -> SuiteResult:
    """Covariance recursion from x₀ = 0 stays inside the κ²e^{−2γt}‖Σ_K‖ envelope."""
    cfg = golden("mixing")
    rng = streams.generator(7)
    loaded = benchmark("random_3x2")
    system = loaded.system
    consts = constants_for_system(system, loaded.K0)
    K_star, _ = solve_optimal(system)
    violations, worst_ratio = 0, 0.0
    for _ in range(cfg["controllers"]):
        K = _stable_gain(system, K_star.K, 0.3, rng, max_cost=consts.nu)
        Sigma_K = solve_sigma(system, K)
        gap0 = float(np.linalg.norm(Sigma_K, 2))
        for t, Sigma_t in enumerate(covariance_recursion(system, K, np.zeros_like(Sigma_K), cfg["steps"])):
            err = float(np.linalg.norm(Sigma_t - Sigma_K, 2))
            bound = mixing_envelope(consts.kappa, consts.gamma, t, gap0)
            worst_ratio = max(worst_ratio, err / bound)
            if err > bound * (1 + 1e-9) + 1e-12:
                violations += 1
    return SuiteResult(
        "mixing_rate", _status(violations == 0), worst_ratio, "error/envelope<=1",
        f"{violations} violations over {cfg['controllers']} controllers",
    )


SUITES: Dict[str, Callable[[SeedStreams, bool], SuiteResult]] = {
    "lyapunov_residuals": lyapunov_residuals,
    "gradient_finite_differences": gradient_finite_differences,
    "optimality": optimality,
    "corrupted_gd_zoo": corrupted_gd_zoo,
    "exploration_exponent": exploration_exponent,
    "gradient_fidelity": gradient_fidelity_decay,
    "truncation_sampler": truncation_sampler,
    "mixing_rate": mixing_rate,
}


def run_validation(seed: int = 0, quick: bool = False, only: Optional[List[str]] = None) -> ValidationReport:
    """Run the suites in a fixed order; a suite that raises is reported as ERROR."""
    streams = SeedStreams(seed)
    results = []
    for name, suite in SUITES.items():
        if only and name not in only:
            continue
        start = time.time()
        try:
            result = suite(streams, quick)
        except Exception as e:
            logger.warning("suite %s raised: %s", name, e)
            result = SuiteResult(name, SuiteStatus.ERROR, detail=f"{type(e).__name__}: {e}")
        result.seconds = time.time() - start
        logger.info("%s: %s (%.1fs)", name, result.status.value, result.seconds)
        results.append(result)
    return ValidationReport(suites=results, seed=seed, quick=quick)
