"""
Tests for the online policy gradient learner

Testing:
1. Theoretical schedule, overrides and r0 clamping
2. Epoch plan and sub-epoch counts
3. Learning runs: length, reproducibility, common noise with baselines
4. Perturbation geometry and gradient-estimate direction
5. Divergence handling with partial traces
6. Convergence of the desk-scale scalar run
7. CSV export
"""

import csv
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from errors import InvalidArgument, LearnerDiverged
from experiments.benchmarks import benchmark
from experiments.config import profile_overrides
from learner import (
    EPOCH_COLUMNS,
    TRACE_COLUMNS,
    OnlinePolicyGradient,
    ScheduleOverrides,
    epoch_plan,
    epoch_sqrt_sum,
    regret,
    run,
    run_fixed,
    theorem1_schedule,
    write_epoch_csv,
    write_trace_csv,
)
from lqr import Controller, constants_for_system, infinite_horizon_cost, solve_optimal
from rng import SeedStreams


# ==================== FIXTURES ====================

@pytest.fixture(scope="module")
def scalar():
    return benchmark("scalar")


@pytest.fixture(scope="module")
def consts(scalar):
    return constants_for_system(scalar.system, scalar.K0)


def make_schedule(scalar, consts, T, overrides=None):
    system = scalar.system
    return theorem1_schedule(consts, T, 0.01, system.d_x, system.d_u, system.noise.bound_W,
                             overrides if overrides is not None else profile_overrides("desk", "scalar"))


@pytest.fixture
def desk_schedule(scalar, consts):
    return make_schedule(scalar, consts, 20000)


# ==================== SCHEDULE ====================

def test_theoretical_schedule_is_huge(scalar, consts):
    schedule = make_schedule(scalar, consts, 10_000, ScheduleOverrides())
    assert schedule.m0 > 1e12
    assert schedule.theoretical_only
    assert schedule.eta == pytest.approx(schedule.theoretical.eta)
    assert schedule.eta == pytest.approx(consts.alpha0 / (128 * consts.nu * consts.psi ** 2 * consts.kappa ** 10))


def test_desk_profile_pins(desk_schedule):
    assert desk_schedule.eta == pytest.approx(0.05)
    assert desk_schedule.mu == pytest.approx(6.0)
    assert desk_schedule.m0 == 200
    assert desk_schedule.tau == 8
    assert desk_schedule.rho == pytest.approx(0.9)
    assert not desk_schedule.theoretical_only


def test_multipliers_apply_after_pins(scalar, consts):
    overrides = profile_overrides("desk", "scalar").with_multipliers(eta_mult=0.5, m0_mult=2.0, tau_mult=1.5)
    schedule = make_schedule(scalar, consts, 20000, overrides)
    assert schedule.eta == pytest.approx(0.025)
    assert schedule.m0 == 400
    assert schedule.tau == 12


def test_r0_clamped_to_D0(scalar, consts):
    overrides = ScheduleOverrides(eta=0.05, mu=6.0, r0=0.5, D0=0.3, m0=10, tau=2)
    schedule = make_schedule(scalar, consts, 1000, overrides)
    assert schedule.r0_clamped
    assert schedule.r0 == pytest.approx(0.3)
    assert schedule.theoretical.r0 < 0.3


def test_overrides_validation():
    with pytest.raises(InvalidArgument):
        ScheduleOverrides(eta_mult=0.0)
    with pytest.raises(InvalidArgument):
        ScheduleOverrides(tau=-1)
    with pytest.raises(InvalidArgument):
        ScheduleOverrides.from_dict({"learning_rate": 0.1})


def test_decay_outside_unit_interval_rejected(scalar, consts):
    with pytest.raises(InvalidArgument):
        make_schedule(scalar, consts, 1000, ScheduleOverrides(eta=1.0, mu=6.0, m0=10, tau=2))


def test_radius_and_subepochs(desk_schedule):
    assert desk_schedule.radius(2) == pytest.approx(0.2 * 0.9)
    assert desk_schedule.subepochs(0) == 200
    assert desk_schedule.subepochs(1) == math.ceil(200 / 0.81)


def test_epoch_plan_fills_horizon(desk_schedule):
    plan = epoch_plan(desk_schedule, 20000)
    assert sum(p.steps for p in plan) == 20000
    assert all(not p.truncated for p in plan[:-1])
    assert all(p.steps == p.m * desk_schedule.tau for p in plan[:-1])
    assert [p.j for p in plan] == list(range(len(plan)))


def test_epoch_plan_exact_fit(desk_schedule):
    """A horizon equal to the first epoch's length leaves one untruncated epoch."""
    plan = epoch_plan(desk_schedule, 200 * 8)
    assert len(plan) == 1
    assert not plan[0].truncated


def test_epoch_sqrt_sum_below_bound(desk_schedule):
    total, bound = epoch_sqrt_sum(desk_schedule, 100000)
    assert 0 < total <= bound


# ==================== LEARNER ====================

def test_learner_only_steps_along_estimate(desk_schedule):
    learner = OnlinePolicyGradient(np.zeros((1, 1)), desk_schedule)
    learner.update(np.array([[2.0]]))
    np.testing.assert_allclose(learner.K, [[-0.1]])


def test_run_returns_exactly_T_costs(scalar, desk_schedule):
    trace = run(scalar.system, scalar.K0, desk_schedule, 5000, 1)
    assert trace.costs.shape == (5000,)
    assert trace.completed
    assert trace.epoch_of_step.shape == (5000,)
    assert sum(trace.steps_by_epoch().values()) == 5000
    assert trace.regret_curve[-1] == pytest.approx(regret(trace))


def test_run_is_reproducible(scalar, desk_schedule):
    a = run(scalar.system, scalar.K0, desk_schedule, 3000, 7)
    b = run(scalar.system, scalar.K0, desk_schedule, 3000, SeedStreams(7))
    np.testing.assert_array_equal(a.costs, b.costs)
    np.testing.assert_array_equal(a.K_last, b.K_last)


def test_different_seeds_differ(scalar, desk_schedule):
    a = run(scalar.system, scalar.K0, desk_schedule, 1000, 1)
    b = run(scalar.system, scalar.K0, desk_schedule, 1000, 2)
    assert not np.array_equal(a.costs, b.costs)


def test_epoch_records(scalar, desk_schedule):
    trace = run(scalar.system, scalar.K0, desk_schedule, 5000, 3)
    first = trace.epoch_records[0]
    assert first.m_observed == 200
    assert first.J_K == pytest.approx(4.0 / 3.0)
    assert first.g is not None
    assert 0.0 <= first.grad_angle_deg <= 180.0
    assert trace.epoch_records[-1].truncated


def test_truncated_final_epoch_does_not_update(scalar, desk_schedule):
    """T = 1600 + 100: epoch 1 is cut short and K stays at K_1."""
    trace = run(scalar.system, scalar.K0, desk_schedule, 1700, 4)
    assert len(trace.epoch_records) == 2
    np.testing.assert_array_equal(trace.K_last, trace.epoch_records[1].K)


def test_empty_horizon(scalar, desk_schedule):
    trace = run(scalar.system, scalar.K0, desk_schedule, 0, 0)
    assert trace.costs.size == 0
    assert regret(trace) == 0.0


def test_run_fixed_shares_noise_with_learner(scalar, desk_schedule):
    """The first round is played from x = 0 with the same noise draw in both runs."""
    K_star, J_star = solve_optimal(scalar.system)
    fixed = run_fixed(scalar.system, K_star, 500, 5, J_star=J_star)
    assert fixed.costs.shape == (500,)
    assert fixed.costs[0] == 0.0
    assert fixed.J_star == J_star


def test_optimal_policy_regret_is_small(scalar):
    K_star, J_star = solve_optimal(scalar.system)
    trace = run_fixed(scalar.system, K_star, 20000, 2, J_star=J_star)
    # Only fluctuations around J★: O(√T)
    assert abs(regret(trace)) < 20 * math.sqrt(20000)


def test_fixed_suboptimal_regret_grows_linearly(scalar):
    """Playing K0 = 0 for T rounds costs about T·(J(0) − J★) in regret."""
    _, J_star = solve_optimal(scalar.system)
    T = 200000
    trace = run_fixed(scalar.system, scalar.K0, T, 6, J_star=J_star)
    expected = T * (infinite_horizon_cost(scalar.system, scalar.K0) - J_star)
    assert regret(trace) == pytest.approx(expected, rel=0.1)


def test_bad_initial_controller_shape(scalar, desk_schedule):
    with pytest.raises(InvalidArgument):
        run(scalar.system, Controller(np.zeros((1, 2))), desk_schedule, 100, 0)


def test_divergence_keeps_partial_trace(scalar, consts):
    """A step size far too large throws K_1 out of the stabilizing set."""
    schedule = make_schedule(scalar, consts, 4000, ScheduleOverrides(eta=100.0, mu=0.01, r0=0.2, D0=0.3, m0=200, tau=8))
    with pytest.raises(LearnerDiverged) as exc:
        run(scalar.system, scalar.K0, schedule, 4000, 0)
    assert exc.value.epoch == 1
    partial = exc.value.trace
    assert partial.costs.shape == (1600,)
    assert not partial.completed
    assert partial.diverged


# ==================== PERTURBATIONS ====================

def test_perturbed_gains_sit_on_the_radius_sphere(scalar, desk_schedule):
    learner = OnlinePolicyGradient(np.array([[-0.1]]), desk_schedule)
    rng = np.random.default_rng(0)
    for j in range(4):
        r = desk_schedule.radius(j)
        K_ji = learner.perturbed(r, learner.direction(rng))
        assert K_ji.distance(Controller(learner.K)) == pytest.approx(r, rel=1e-12)

    trace = run(scalar.system, scalar.K0, desk_schedule, 5000, 2)
    for rec in trace.epoch_records:
        for U in rec.directions:
            played = Controller(rec.K + rec.r * U)
            assert played.distance(Controller(rec.K)) == pytest.approx(rec.r, rel=1e-12)


def test_gradient_estimate_points_downhill(scalar, consts):
    """With 10⁴ sub-epochs per epoch the estimate is within 60° of ∇J in at least 90% of epochs."""
    overrides = ScheduleOverrides(eta=0.05, mu=6.0, r0=0.2, D0=0.3, m0=10000, tau=4)
    schedule = make_schedule(scalar, consts, 100000, overrides)
    trace = run(scalar.system, scalar.K0, schedule, 100000, 9)
    angles = [rec.grad_angle_deg for rec in trace.epoch_records if not rec.truncated]
    assert len(angles) >= 2
    assert np.mean(np.array(angles) < 60.0) >= 0.9


# ==================== CONVERGENCE ====================

def _final_gap(scalar, T, seed):
    system = scalar.system
    consts = constants_for_system(system, scalar.K0)
    schedule = make_schedule(scalar, consts, T)
    _, J_star = solve_optimal(system)
    trace = run(system, scalar.K0, schedule, T, seed, J_star=J_star)
    return infinite_horizon_cost(system, Controller(trace.K_last)) - J_star


def test_learner_closes_most_of_the_gap(scalar):
    _, J_star = solve_optimal(scalar.system)
    gap0 = 4.0 / 3.0 - J_star
    gaps = [_final_gap(scalar, 50000, seed) for seed in range(3)]
    assert np.median(gaps) <= 0.25 * gap0


@pytest.mark.slow
def test_learner_converges_on_scalar(scalar):
    _, J_star = solve_optimal(scalar.system)
    gap0 = 4.0 / 3.0 - J_star
    gaps = [_final_gap(scalar, 200000, seed) for seed in range(3)]
    assert np.median(gaps) <= 0.05 * gap0


# ==================== EXPORT ====================

def test_trace_and_epoch_csv(tmp_path, scalar, desk_schedule):
    trace = run(scalar.system, scalar.K0, desk_schedule, 2000, 1)
    trace_path = write_trace_csv(tmp_path / "trace.csv", trace)
    epoch_path = write_epoch_csv(tmp_path / "epochs.csv", trace)

    with open(trace_path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == TRACE_COLUMNS
    assert len(rows) == 2001
    assert rows[1][0] == "1"
    assert float(rows[-1][4]) == pytest.approx(regret(trace))

    with open(epoch_path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == EPOCH_COLUMNS
    assert len(rows) == 1 + len(trace.epoch_records)


def test_csv_is_byte_identical_for_same_seed(tmp_path, scalar, desk_schedule):
    a = write_trace_csv(tmp_path / "a.csv", run(scalar.system, scalar.K0, desk_schedule, 1000, 9))
    b = write_trace_csv(tmp_path / "b.csv", run(scalar.system, scalar.K0, desk_schedule, 1000, 9))
    assert a.read_bytes() == b.read_bytes()
