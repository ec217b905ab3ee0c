"""
Tests for corrupted gradient descent

Testing:
1. Effective corruption recurrence and step-size cap
2. Envelope on clean and corrupted quadratics
3. Sub-level escape detection
4. The PL objective zoo and its corruption patterns
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from errors import DivergenceDetected, InvalidArgument
from experiments.gd_suite import (
    IN_CONTRACT,
    Pattern,
    corrupted_gd_bound_suite,
    corruption_cap,
    corruption_magnitudes,
    default_zoo,
    quadratic,
    sine_perturbed,
)
from smoothing import CorruptionSpec, corrupted_gd, effective_corruption_sq, step_size_cap


# ==================== FIXTURES ====================

@pytest.fixture
def quad():
    """½ xᵀ diag(1, 4) x."""
    return quadratic("quad_test", np.diag([1.0, 4.0]), [2.0, -1.0])


# ==================== RECURRENCE ====================

def test_effective_corruption_decays():
    out = effective_corruption_sq([2.0, 0.0, 0.0, 1.0], rho=0.5)
    np.testing.assert_allclose(out, [4.0, 2.0, 1.0, 1.0])


def test_effective_corruption_tracks_maximum():
    out = effective_corruption_sq([1.0, 3.0, 0.5], rho=0.9)
    np.testing.assert_allclose(out, [1.0, 9.0, 8.1])


def test_step_size_cap():
    assert step_size_cap(beta=4.0, mu=2.0, G=1.0, D0=10.0) == pytest.approx(0.25)
    assert step_size_cap(beta=0.1, mu=2.0, G=1.0, D0=10.0) == pytest.approx(2.0)
    assert step_size_cap(beta=0.1, mu=0.1, G=10.0, D0=1.0) == pytest.approx(0.05)


def test_corruption_spec_validation():
    with pytest.raises(InvalidArgument):
        CorruptionSpec([-1.0], 0.5)
    with pytest.raises(InvalidArgument):
        CorruptionSpec([1.0], 1.5)


def test_corruption_spec_cap_check():
    spec = CorruptionSpec([0.1, 0.2], 0.9)
    assert spec.within_cap(G=1.0, f_bar=1.0, f_star=0.0, mu=1.0)
    assert not spec.within_cap(G=0.15, f_bar=1.0, f_star=0.0, mu=1.0)


# ==================== ENVELOPE ====================

def test_clean_descent_stays_under_envelope(quad):
    eta = step_size_cap(quad.beta, quad.mu, quad.G, quad.D0)
    report = corrupted_gd(lambda t, x: quad.grad(x), quad.x0, eta, 200, mu=quad.mu, f_monitor=quad.f)
    assert report.violations().size == 0
    assert report.gaps[-1] < 1e-6 * report.gaps[0]
    assert len(report.iterates) == 201


def test_constant_corruption_floor(quad):
    """With ε_t = ε the gap settles below 4ε²/μ."""
    eta = step_size_cap(quad.beta, quad.mu, quad.G, quad.D0)
    rho = 1.0 - quad.mu * eta / 3.0
    eps = 0.5 * corruption_cap(quad)
    spec = CorruptionSpec(np.full(500, eps), rho)
    direction = np.array([1.0, 0.0])
    report = corrupted_gd(lambda t, x: quad.grad(x) + eps * direction, quad.x0, eta, 500,
                          mu=quad.mu, f_monitor=quad.f, corruption=spec)
    assert report.violations().size == 0
    assert report.gaps[-1] <= 4.0 * eps ** 2 / quad.mu


def test_oracle_only_drives_update(quad):
    """Without a monitor no values are recorded, the iterates still move."""
    report = corrupted_gd(lambda t, x: quad.grad(x), quad.x0, 0.1, 10, mu=quad.mu)
    assert report.values.size == 0
    assert not np.allclose(report.iterates[-1], quad.x0)


def test_short_corruption_sequence_rejected(quad):
    with pytest.raises(InvalidArgument):
        corrupted_gd(lambda t, x: quad.grad(x), quad.x0, 0.1, 10, mu=quad.mu,
                     corruption=CorruptionSpec([0.0] * 5, 0.9))


def test_sublevel_escape_raises(quad):
    with pytest.raises(DivergenceDetected) as exc:
        corrupted_gd(lambda t, x: -quad.grad(x), quad.x0, 0.5, 50, mu=quad.mu,
                     f_monitor=quad.f, f_bar=quad.f_bar)
    assert exc.value.value > quad.f_bar


# ==================== ZOO ====================

def test_zoo_contents():
    names = [obj.name for obj in default_zoo(np.random.default_rng(0))]
    assert names == ["quad_1d", "quad_2d", "quad_5d", "quad_10d", "quad_2d_illcond", "sine_1d"]


def test_quadratic_constants(quad):
    assert quad.mu == pytest.approx(2.0)
    assert quad.beta == pytest.approx(4.0)
    assert quad.f(quad.x0) == pytest.approx(4.0)
    assert quad.f_bar == pytest.approx(9.0)


def test_sine_objective_is_non_convex():
    obj = sine_perturbed()
    # f'' = 2 + 6 cos 2x is negative near x = π/2
    x = np.array([math.pi / 2])
    h = 1e-4
    second = (obj.f(x + h) - 2 * obj.f(x) + obj.f(x - h)) / h ** 2
    assert second < 0


def test_decaying_pattern():
    eps = corruption_magnitudes(Pattern.DECAYING, 1.0, 0.81, 3)
    np.testing.assert_allclose(eps, [1.0, 0.9, 0.81])
    assert np.all(corruption_magnitudes(Pattern.ZERO, 1.0, 0.9, 4) == 0)


def test_suite_has_no_in_contract_violations():
    report = corrupted_gd_bound_suite(None, 3, steps=1500)
    assert len(report.rows) == 6 * len(Pattern)
    assert report.passed, report.failures()
    in_contract = [r for r in report.rows if r.in_contract]
    assert {r.pattern for r in in_contract} == set(IN_CONTRACT)


def test_suite_oversized_runs_are_reported_not_judged():
    report = corrupted_gd_bound_suite([quadratic("q", [[1.0]], [3.0])], 0, steps=300)
    oversized = [r for r in report.rows if r.pattern == Pattern.OVERSIZED]
    assert len(oversized) == 1
    assert not oversized[0].in_contract
    assert oversized[0].eps0 == pytest.approx(2.0 * corruption_cap(quadratic("q", [[1.0]], [3.0])))
