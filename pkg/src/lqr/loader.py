"""
TOML system definitions.

Schema:

    [system]
    name = "scalar"            # optional
    A = [[0.5]]
    B = [[1.0]]
    Q = [[1.0]]
    R = [[1.0]]
    K0 = [[0.0]]               # optional initial controller (default: zeros)

    [noise]
    kind = "truncated_gaussian"   # or "bounded_iid", "disabled"
    covariance = [[1.0]]
    sigma_sq = 0.99               # optional, derived when omitted
    bound_W = 10.7                # optional, derived when omitted
    horizon = 100000              # truncated Gaussian: T used for the truncation radius
    delta = 0.01                  # truncated Gaussian: confidence δ ∈ (0, 1/3)

Matrices are lists of rows.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from errors import InvalidArgument
from simulator.noise import truncation_params
from .system import Controller, LqrSystem, NoiseKind, NoiseModel

DEFAULT_HORIZON = 100_000
DEFAULT_DELTA = 0.01


@dataclass(frozen=True)
class SystemFile:
    """A loaded system file: the plant and its initial controller."""
    system: LqrSystem
    K0: Controller
    path: Optional[Path] = None


def _matrix(table: Dict[str, Any], key: str, where: str) -> np.ndarray:
    if key not in table:
        raise InvalidArgument(f"[{where}] is missing '{key}'")
    try:
        return np.atleast_2d(np.asarray(table[key], dtype=float))
    except (TypeError, ValueError) as e:
        raise InvalidArgument(f"[{where}] '{key}' is not a numeric matrix: {e}") from e


def noise_from_table(table: Dict[str, Any], d_x: int) -> NoiseModel:
    """Build a NoiseModel from a [noise] table, deriving omitted parameters."""
    kind_name = str(table.get("kind", "truncated_gaussian")).lower()
    try:
        kind = NoiseKind(kind_name)
    except ValueError:
        choices = ", ".join(k.value for k in NoiseKind)
        raise InvalidArgument(f"[noise] kind must be one of {choices}, got '{kind_name}'")

    if kind == NoiseKind.DISABLED:
        return NoiseModel.disabled(d_x)

    cov = _matrix(table, "covariance", "noise") if "covariance" in table else np.eye(d_x)

    if kind == NoiseKind.BOUNDED_IID:
        derived = NoiseModel.bounded_uniform(cov)
        return NoiseModel(
            kind=kind,
            covariance=cov,
            sigma_sq=float(table.get("sigma_sq", derived.sigma_sq)),
            bound_W=float(table.get("bound_W", derived.bound_W)),
        )

    params = truncation_params(
        cov,
        float(table.get("horizon", DEFAULT_HORIZON)),
        float(table.get("delta", DEFAULT_DELTA)),
    )
    return NoiseModel(
        kind=kind,
        covariance=cov,
        sigma_sq=float(table.get("sigma_sq", params.sigma_sq_eff)),
        bound_W=float(table.get("bound_W", params.W_bound)),
        truncation_radius=float(table.get("truncation_radius", params.radius)),
    )


def system_from_dict(data: Dict[str, Any], default_name: str = "system") -> SystemFile:
    """Build a SystemFile from parsed TOML content."""
    if "system" not in data:
        raise InvalidArgument("missing [system] table")
    table = data["system"]

    A = _matrix(table, "A", "system")
    B = _matrix(table, "B", "system")
    Q = _matrix(table, "Q", "system")
    R = _matrix(table, "R", "system")
    noise = noise_from_table(data.get("noise", {}), A.shape[0])

    system = LqrSystem(A=A, B=B, Q=Q, R=R, noise=noise, name=str(table.get("name", default_name)))
    K0 = Controller(_matrix(table, "K0", "system")) if "K0" in table else Controller.zeros(system.d_u, system.d_x)
    if K0.shape != (system.d_u, system.d_x):
        raise InvalidArgument(f"K0 has shape {K0.shape}, expected ({system.d_u}, {system.d_x})")
    return SystemFile(system=system, K0=K0)


def load_system(path: Union[str, Path]) -> SystemFile:
    """
    Read a system definition. The file is never modified.

    Raises:
        FileNotFoundError: if the path does not exist
        tomllib.TOMLDecodeError: on malformed TOML (message carries line/column)
        InvalidArgument: on schema or validation errors
    """
    path = Path(path)
    with open(path, "rb") as f:
        data = tomllib.load(f)
    loaded = system_from_dict(data, default_name=path.stem)
    return SystemFile(system=loaded.system, K0=loaded.K0, path=path)
