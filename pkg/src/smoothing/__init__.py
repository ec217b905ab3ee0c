"""
LQR-PG Smoothing Module
Zeroth-order gradient estimation and corrupted gradient descent, for any objective.

Exports:
- sample_sphere, one_point_estimate, smoothed_value
- CorruptionSpec, GdReport, corrupted_gd
"""

from .sphere import (
    SphereDirection,
    one_point_estimate,
    sample_ball,
    sample_sphere,
    sample_sphere_batch,
    smoothed_value,
)
from .corrupted_gd import (
    CorruptionSpec,
    GdReport,
    corrupted_gd,
    effective_corruption_sq,
    step_size_cap,
)

__all__ = [
    "SphereDirection",
    "one_point_estimate",
    "sample_ball",
    "sample_sphere",
    "sample_sphere_batch",
    "smoothed_value",
    "CorruptionSpec",
    "GdReport",
    "corrupted_gd",
    "effective_corruption_sq",
    "step_size_cap",
]
