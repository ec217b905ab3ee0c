"""
Benchmark plants shipped with the repo.

scalar and marginal_2x1 live in systems/*.toml; random_3x2 is generated from
a frozen seed so it never changes between checkouts.
"""

from pathlib import Path
from typing import Dict, Optional

import numpy as np

from errors import InvalidArgument
from lqr.loader import SystemFile, load_system
from lqr.system import Controller, LqrSystem
from simulator.noise import gaussian_noise_model

SYSTEMS_DIR = Path(__file__).parent / "systems"

RANDOM_3X2_SEED = 20240611
BENCHMARK_HORIZON = 1_000_000
BENCHMARK_DELTA = 0.01

BENCHMARK_NAMES = ("scalar", "marginal_2x1", "random_3x2")


def random_stable_system(
    d_x: int,
    d_u: int,
    rng: np.random.Generator,
    spectral_radius: float = 0.8,
    name: str = "random",
    horizon: int = BENCHMARK_HORIZON,
    delta: float = BENCHMARK_DELTA,
) -> LqrSystem:
    """
    Random plant with ρ(A) = spectral_radius, Gaussian B, Q = R = I and
    truncated Gaussian noise of covariance I.
    """
    if not 0 < spectral_radius < 1:
        raise InvalidArgument(f"spectral radius must lie in (0, 1), got {spectral_radius}")
    A = rng.standard_normal((d_x, d_x))
    A *= spectral_radius / np.abs(np.linalg.eigvals(A)).max()
    B = rng.standard_normal((d_x, d_u)) / np.sqrt(d_x)
    return LqrSystem(
        A=A,
        B=B,
        Q=np.eye(d_x),
        R=np.eye(d_u),
        noise=gaussian_noise_model(np.eye(d_x), horizon, delta),
        name=name,
    )


def _random_3x2() -> SystemFile:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(RANDOM_3X2_SEED)))
    system = random_stable_system(3, 2, rng, spectral_radius=0.9, name="random_3x2")
    return SystemFile(system=system, K0=Controller.zeros(2, 3))


def benchmark(name: str) -> SystemFile:
    """Load one benchmark by name."""
    if name == "random_3x2":
        return _random_3x2()
    path = SYSTEMS_DIR / f"{name}.toml"
    if name not in BENCHMARK_NAMES or not path.exists():
        raise InvalidArgument(f"unknown benchmark '{name}', choose from {', '.join(BENCHMARK_NAMES)}")
    return load_system(path)


def all_benchmarks() -> Dict[str, SystemFile]:
    return {name: benchmark(name) for name in BENCHMARK_NAMES}


def resolve_system(ref: str, base_dir: Optional[Path] = None) -> SystemFile:
    """A benchmark name or a path to a TOML system file."""
    if ref in BENCHMARK_NAMES:
        return benchmark(ref)
    path = Path(ref)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    return load_system(path)
