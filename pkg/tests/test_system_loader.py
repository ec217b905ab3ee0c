"""
Tests for TOML system files and the shipped benchmarks

Testing:
1. Loading the benchmark files
2. Derived noise parameters
3. Schema and syntax errors
4. Benchmark resolution by name or path
"""

import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from errors import InvalidArgument
from experiments.benchmarks import (
    BENCHMARK_NAMES,
    SYSTEMS_DIR,
    all_benchmarks,
    benchmark,
    random_stable_system,
    resolve_system,
)
from lqr.analytics import spectral_radius
from lqr.loader import load_system, system_from_dict
from lqr.system import NoiseKind


# ==================== FIXTURES ====================

SCALAR_TOML = """
[system]
name = "tiny"
A = [[0.5]]
B = [[1.0]]
Q = [[1.0]]
R = [[1.0]]
"""


@pytest.fixture
def write_toml(tmp_path):
    def write(text: str, name: str = "system.toml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write


# ==================== LOADING ====================

def test_load_scalar_benchmark():
    loaded = load_system(SYSTEMS_DIR / "scalar.toml")
    assert loaded.system.name == "scalar"
    assert loaded.system.d_x == 1 and loaded.system.d_u == 1
    assert loaded.system.noise.kind == NoiseKind.TRUNCATED_GAUSSIAN
    np.testing.assert_array_equal(loaded.K0.K, [[0.0]])


def test_default_noise_is_truncated_gaussian(write_toml):
    loaded = load_system(write_toml(SCALAR_TOML))
    noise = loaded.system.noise
    assert noise.kind == NoiseKind.TRUNCATED_GAUSSIAN
    assert noise.sigma_sq < 1.0
    assert noise.bound_W > 0
    np.testing.assert_array_equal(loaded.K0.K, [[0.0]])


def test_explicit_noise_parameters_kept(write_toml):
    text = SCALAR_TOML + '\n[noise]\nkind = "bounded_iid"\ncovariance = [[2.0]]\nsigma_sq = 1.5\nbound_W = 5.0\n'
    noise = load_system(write_toml(text)).system.noise
    assert noise.kind == NoiseKind.BOUNDED_IID
    assert noise.sigma_sq == 1.5
    assert noise.bound_W == 5.0


def test_disabled_noise(write_toml):
    noise = load_system(write_toml(SCALAR_TOML + '\n[noise]\nkind = "disabled"\n')).system.noise
    assert noise.kind == NoiseKind.DISABLED


def test_file_is_not_modified(write_toml):
    path = write_toml(SCALAR_TOML)
    before = path.read_bytes()
    load_system(path)
    assert path.read_bytes() == before


# ==================== ERRORS ====================

def test_malformed_toml_reports_position(write_toml):
    path = write_toml("[system\nA = [[0.5]]\n")
    with pytest.raises(tomllib.TOMLDecodeError) as exc:
        load_system(path)
    assert "line" in str(exc.value)


def test_missing_system_table():
    with pytest.raises(InvalidArgument):
        system_from_dict({"noise": {}})


def test_missing_matrix():
    with pytest.raises(InvalidArgument, match="'R'"):
        system_from_dict({"system": {"A": [[0.5]], "B": [[1.0]], "Q": [[1.0]]}})


def test_wrong_K0_shape():
    data = tomllib.loads(SCALAR_TOML)
    data["system"]["K0"] = [[0.0, 0.0]]
    with pytest.raises(InvalidArgument, match="K0"):
        system_from_dict(data)


def test_unknown_noise_kind(write_toml):
    with pytest.raises(InvalidArgument, match="kind"):
        load_system(write_toml(SCALAR_TOML + '\n[noise]\nkind = "laplace"\n'))


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_system("does/not/exist.toml")


# ==================== BENCHMARKS ====================

def test_all_benchmarks_load():
    loaded = all_benchmarks()
    assert tuple(loaded) == BENCHMARK_NAMES
    for name, entry in loaded.items():
        assert entry.system.name == name


def test_random_3x2_is_frozen():
    a = benchmark("random_3x2").system
    b = benchmark("random_3x2").system
    np.testing.assert_array_equal(a.A, b.A)
    np.testing.assert_array_equal(a.B, b.B)
    assert spectral_radius(a.A) == pytest.approx(0.9)


def test_random_stable_system_spectral_radius():
    rng = np.random.default_rng(0)
    system = random_stable_system(4, 2, rng, spectral_radius=0.7)
    assert spectral_radius(system.A) == pytest.approx(0.7)
    assert system.B.shape == (4, 2)


def test_resolve_by_path(write_toml):
    path = write_toml(SCALAR_TOML)
    assert resolve_system(str(path)).system.name == "tiny"
    assert resolve_system("scalar").system.name == "scalar"


def test_unknown_benchmark():
    with pytest.raises(InvalidArgument):
        benchmark("quintic")
