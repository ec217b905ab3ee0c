"""
Tests for the exact LQR analytics

Testing:
1. Steady-state covariance and cost-to-go against scipy oracles
2. Scalar closed form of the optimal controller
3. Policy gradient against finite differences
4. Batched costs and instability handling
5. Regularity constants and strong stability
6. PL, Lipschitz and trace bounds over sampled admissible gains
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import solve_discrete_are, solve_discrete_lyapunov

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from errors import InvalidArgument, Unstable
from experiments.benchmarks import benchmark
from lqr import (
    AdmissibilityStatus,
    Controller,
    LqrSystem,
    NoiseModel,
    auto_psi,
    batch_cost,
    constants_for_system,
    cost_bound,
    exact_policy_gradient,
    infinite_horizon_cost,
    regularity_constants,
    solve_optimal,
    solve_P,
    solve_sigma,
    state_bound,
    steady_state,
    strong_stability,
)
from lqr.analytics import DEFAULT_TOL, stein_residual


# ==================== FIXTURES ====================

def make_system(A, B, Q=None, R=None, cov=None, name="test"):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d_x, d_u = B.shape
    return LqrSystem(
        A=A,
        B=B,
        Q=np.eye(d_x) if Q is None else Q,
        R=np.eye(d_u) if R is None else R,
        noise=NoiseModel.bounded_uniform(np.eye(d_x) if cov is None else cov),
        name=name,
    )


@pytest.fixture
def scalar():
    """x' = 0.5x + u + w with unit costs and noise."""
    return make_system([[0.5]], [[1.0]])


@pytest.fixture
def plant_2x2():
    A = np.array([[0.9, 0.2], [0.0, 0.7]])
    B = np.array([[1.0, 0.0], [0.3, 0.5]])
    return make_system(A, B, Q=np.diag([1.0, 0.5]), R=np.diag([0.8, 1.0]), cov=np.array([[1.0, 0.2], [0.2, 0.6]]))


@pytest.fixture
def gain_2x2():
    return Controller(np.array([[-0.3, 0.1], [0.05, -0.2]]))


@pytest.fixture(scope="module")
def admissible_3x2():
    """Random 3x2 benchmark with 40 gains K★ + sU that satisfy J(K) ≤ ν."""
    loaded = benchmark("random_3x2")
    system = loaded.system
    consts = constants_for_system(system, loaded.K0)
    K_star, J_star = solve_optimal(system)
    rng = np.random.default_rng(5)
    reach = np.linalg.norm(K_star.K) + 0.5
    gains = []
    while len(gains) < 40:
        U = rng.standard_normal(K_star.shape)
        K = Controller(K_star.K + reach * rng.random() * U / np.linalg.norm(U))
        if infinite_horizon_cost(system, K) <= consts.nu:
            gains.append(K)
    return system, consts, J_star, gains


# ==================== STEADY STATE ====================

def test_sigma_matches_scipy_lyapunov(plant_2x2, gain_2x2):
    """Σ_K solves Σ = Σ_w + MΣMᵀ."""
    M = plant_2x2.A + plant_2x2.B @ gain_2x2.K
    expected = solve_discrete_lyapunov(M, plant_2x2.Sigma_w)
    np.testing.assert_allclose(solve_sigma(plant_2x2, gain_2x2), expected, rtol=1e-10, atol=1e-12)


def test_P_matches_scipy_lyapunov(plant_2x2, gain_2x2):
    M = plant_2x2.A + plant_2x2.B @ gain_2x2.K
    C = plant_2x2.Q + gain_2x2.K.T @ plant_2x2.R @ gain_2x2.K
    expected = solve_discrete_lyapunov(M.T, C)
    np.testing.assert_allclose(solve_P(plant_2x2, gain_2x2), expected, rtol=1e-10, atol=1e-12)


def test_cost_dual_formula(plant_2x2, gain_2x2):
    """tr(P_K Σ_w) and tr((Q + KᵀRK)Σ_K) agree."""
    sol = steady_state(plant_2x2, gain_2x2)
    C = plant_2x2.Q + gain_2x2.K.T @ plant_2x2.R @ gain_2x2.K
    assert sol.J == pytest.approx(float(np.trace(C @ sol.Sigma)), rel=1e-10)


def test_scalar_cost_at_zero(scalar):
    """J(0) = 1 / (1 − 0.25) for the scalar plant."""
    assert infinite_horizon_cost(scalar, Controller.zeros(1, 1)) == pytest.approx(4.0 / 3.0, rel=1e-12)


def test_unstable_controller_has_infinite_cost(scalar):
    assert infinite_horizon_cost(scalar, Controller(np.array([[1.0]]))) == math.inf


def test_solve_sigma_raises_on_unstable(scalar):
    with pytest.raises(Unstable) as exc:
        solve_sigma(scalar, Controller(np.array([[1.0]])))
    assert exc.value.spectral_radius == pytest.approx(1.5)


def test_controller_shape_checked(scalar):
    with pytest.raises(InvalidArgument):
        solve_sigma(scalar, Controller(np.zeros((2, 1))))


def test_residual_absolute_for_small_and_relative_for_large_solutions():
    small = make_system([[0.5]], [[1.0]], cov=np.array([[0.01]]))
    Sigma = solve_sigma(small, Controller.zeros(1, 1))
    assert Sigma[0, 0] == pytest.approx(0.01 / 0.75, rel=1e-10)
    assert stein_residual(Sigma, small.A, small.Sigma_w) <= DEFAULT_TOL

    slow = make_system([[0.999]], [[1.0]])
    Sigma = solve_sigma(slow, Controller.zeros(1, 1))
    assert Sigma[0, 0] == pytest.approx(1.0 / (1.0 - 0.999 ** 2), rel=1e-10)
    assert stein_residual(Sigma, slow.A, slow.Sigma_w) <= DEFAULT_TOL * np.linalg.norm(Sigma)


# ==================== OPTIMAL CONTROL ====================

def test_scalar_optimal_closed_form(scalar):
    """p★ solves p² − p/4 − 1 = 0 and K★ = −p★/(2(1 + p★))."""
    K_star, J_star = solve_optimal(scalar)
    p_star = (0.25 + math.sqrt(0.0625 + 4.0)) / 2.0
    assert J_star == pytest.approx(p_star, abs=1e-10)
    assert J_star == pytest.approx(1.132782, abs=1e-6)
    assert K_star.K[0, 0] == pytest.approx(-0.265564, abs=1e-6)


def test_optimal_matches_scipy_are(plant_2x2):
    K_star, J_star = solve_optimal(plant_2x2)
    P = solve_discrete_are(plant_2x2.A, plant_2x2.B, plant_2x2.Q, plant_2x2.R)
    B, R, A = plant_2x2.B, plant_2x2.R, plant_2x2.A
    K_expected = -np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
    np.testing.assert_allclose(K_star.K, K_expected, rtol=1e-8, atol=1e-10)
    assert J_star == pytest.approx(float(np.trace(P @ plant_2x2.Sigma_w)), rel=1e-9)


def test_zero_dynamics_optimal_is_zero():
    """With A = 0 nothing is worth controlling."""
    system = make_system(np.zeros((2, 2)), np.eye(2))
    K_star, J_star = solve_optimal(system)
    np.testing.assert_allclose(K_star.K, 0.0, atol=1e-14)
    assert J_star == pytest.approx(float(np.trace(system.Sigma_w)))


def test_gradient_vanishes_at_optimum(plant_2x2):
    K_star, _ = solve_optimal(plant_2x2)
    assert np.linalg.norm(exact_policy_gradient(plant_2x2, K_star)) < 1e-8


# ==================== GRADIENT ====================

def test_gradient_matches_finite_differences(plant_2x2, gain_2x2):
    grad = exact_policy_gradient(plant_2x2, gain_2x2)
    h = 1e-5
    fd = np.zeros_like(grad)
    for idx in np.ndindex(*grad.shape):
        E = np.zeros_like(grad)
        E[idx] = h
        fd[idx] = (infinite_horizon_cost(plant_2x2, Controller(gain_2x2.K + E))
                   - infinite_horizon_cost(plant_2x2, Controller(gain_2x2.K - E))) / (2 * h)
    assert np.linalg.norm(fd - grad) / np.linalg.norm(grad) < 1e-6


def test_scalar_gradient_at_zero(scalar):
    """∇J(0) = 2 · BᵀP A · Σ = 2 · (4/3) · 0.5 · (4/3)."""
    grad = exact_policy_gradient(scalar, Controller.zeros(1, 1))
    assert grad[0, 0] == pytest.approx(2.0 * (4.0 / 3.0) * 0.5 * (4.0 / 3.0), rel=1e-10)


# ==================== BATCHED COSTS ====================

def test_batch_cost_matches_single(plant_2x2):
    rng = np.random.default_rng(4)
    gains = 0.2 * rng.standard_normal((6, 2, 2))
    J = batch_cost(plant_2x2, gains)
    for n in range(6):
        assert J[n] == pytest.approx(infinite_horizon_cost(plant_2x2, Controller(gains[n])), rel=1e-9)


def test_batch_cost_marks_unstable(scalar):
    J = batch_cost(scalar, np.array([[[0.0]], [[1.0]], [[-0.2]]]))
    assert math.isinf(J[1])
    assert np.isfinite(J[[0, 2]]).all()


def test_batch_cost_shape_checked(scalar):
    with pytest.raises(InvalidArgument):
        batch_cost(scalar, np.zeros((3, 2, 1)))


# ==================== REGULARITY ====================

def test_regularity_constants_formulas():
    consts = regularity_constants(nu=4.0, alpha0=1.0, psi=1.0, sigma_sq=1.0, d_x=1)
    assert consts.kappa == pytest.approx(2.0)
    assert consts.gamma == pytest.approx(1.0 / 8.0)
    assert consts.D0 == pytest.approx(1.0 / 64.0)
    assert consts.G == pytest.approx(4.0 * 4.0 * 2.0 ** 7)
    assert consts.mu == pytest.approx(1.0)
    assert consts.beta == pytest.approx(112.0 * 4.0 * 2.0 ** 8)


@pytest.mark.parametrize("kwargs", [
    dict(nu=0.0, alpha0=1.0, psi=1.0, sigma_sq=1.0, d_x=1),
    dict(nu=1.0, alpha0=-1.0, psi=1.0, sigma_sq=1.0, d_x=1),
    dict(nu=1.0, alpha0=1.0, psi=0.5, sigma_sq=1.0, d_x=1),
])
def test_regularity_constants_rejects_bad_inputs(kwargs):
    with pytest.raises(InvalidArgument):
        regularity_constants(**kwargs)


def test_constants_for_system_uses_four_times_initial_cost(scalar):
    consts = constants_for_system(scalar, Controller.zeros(1, 1))
    assert consts.nu == pytest.approx(16.0 / 3.0)
    assert consts.psi == 1.0


def test_auto_psi_rounds_up():
    assert auto_psi(np.array([[0.5]])) == 1.0
    assert auto_psi(np.array([[2.00001]])) == pytest.approx(2.0001)


def test_strong_stability_of_optimum(scalar):
    consts = constants_for_system(scalar, Controller.zeros(1, 1))
    K_star, _ = solve_optimal(scalar)
    cert = strong_stability(scalar, K_star, consts)
    assert cert.is_admissible()
    assert cert.certified
    assert cert.spectral_radius <= 1 - consts.gamma


def test_strong_stability_rejects_costly_controller(scalar):
    consts = constants_for_system(scalar, Controller.zeros(1, 1))
    cert = strong_stability(scalar, Controller(np.array([[0.45]])), consts)
    assert cert.status == AdmissibilityStatus.NOT_ADMISSIBLE


def test_strong_stability_on_random_admissible_gains(admissible_3x2):
    system, consts, _, gains = admissible_3x2
    for K in gains:
        cert = strong_stability(system, K, consts)
        assert cert.is_admissible()
        rho = np.abs(np.linalg.eigvals(system.A + system.B @ K.K)).max()
        assert cert.spectral_radius == pytest.approx(rho)
        assert rho <= 1 - consts.gamma * (1 - 1e-9)


def test_pl_inequality_on_admissible_gains(admissible_3x2):
    """μ(J(K) − J★) ≤ ‖∇J(K)‖²_F."""
    system, consts, J_star, gains = admissible_3x2
    for K in gains:
        gap = infinite_horizon_cost(system, K) - J_star
        assert consts.mu * gap <= np.linalg.norm(exact_policy_gradient(system, K)) ** 2 * (1 + 1e-9)


def test_cost_lipschitz_within_D0(admissible_3x2):
    system, consts, _, gains = admissible_3x2
    rng = np.random.default_rng(8)
    checked = 0
    for K in gains:
        U = rng.standard_normal(K.shape)
        other = K.perturbed(consts.D0 * rng.random(), U / np.linalg.norm(U))
        J_other = infinite_horizon_cost(system, other)
        if J_other > consts.nu:
            continue
        checked += 1
        assert abs(infinite_horizon_cost(system, K) - J_other) <= consts.G * K.distance(other)
    assert checked >= len(gains) // 2


def test_trace_bounds(admissible_3x2):
    """tr(P_K) ≤ J/σ² and tr(Σ_K) ≤ J/α₀."""
    system, consts, _, gains = admissible_3x2
    for K in gains:
        sol = steady_state(system, K)
        assert np.trace(sol.P) <= sol.J / consts.sigma_sq * (1 + 1e-9)
        assert np.trace(sol.Sigma) <= sol.J / consts.alpha0 * (1 + 1e-9)


# ==================== TYPES ====================

def test_system_rejects_indefinite_cost():
    with pytest.raises(InvalidArgument):
        make_system([[0.5]], [[1.0]], Q=np.array([[0.0]]))


def test_system_rejects_shape_mismatch():
    with pytest.raises(InvalidArgument):
        make_system(np.eye(2), np.ones((3, 1)))


def test_controller_distance():
    a = Controller(np.array([[1.0, 0.0]]))
    b = Controller(np.array([[0.0, 1.0]]))
    assert a.distance(b) == pytest.approx(math.sqrt(2.0))


def test_state_and_cost_bounds():
    consts = regularity_constants(nu=4.0, alpha0=1.0, psi=1.0, sigma_sq=1.0, d_x=1)
    assert state_bound(consts, W=2.0) == pytest.approx(6.0 * 16.0 * 2.0)
    assert cost_bound(consts, W=2.0) == pytest.approx(36.0 * 4.0 * 256.0 * 4.0)
