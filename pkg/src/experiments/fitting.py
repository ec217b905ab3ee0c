"""
Log-log scaling fits.

Per-point samples (one per seed or direction) are averaged first; the slope
is the least-squares fit of log₁₀ mean against log₁₀ x. Standard errors come
from a bootstrap over the samples at each point.
"""

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from console import get_logger
from errors import InvalidArgument

logger = get_logger("experiments.fitting")

BOOTSTRAP_RESAMPLES = 200


@dataclass
class ScalingFit:
    """y ≈ 10^intercept · x^slope."""
    slope: float
    intercept: float
    r2: float
    x: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    counts: np.ndarray
    slope_stderr: float = math.nan
    dropped: List[float] = field(default_factory=list)  # x values with non-positive mean

    @property
    def n_points(self) -> int:
        return int(self.x.shape[0]) - len(self.dropped)

    def predict(self, x) -> np.ndarray:
        return 10.0 ** (self.intercept + self.slope * np.log10(np.asarray(x, dtype=float)))

    def within(self, low: float, high: float) -> bool:
        return math.isfinite(self.slope) and low <= self.slope <= high


def _ols(log_x: np.ndarray, log_y: np.ndarray):
    model = LinearRegression().fit(log_x.reshape(-1, 1), log_y)
    return float(model.coef_[0]), float(model.intercept_), model


def fit_loglog(x: Sequence[float], y: Sequence[float]):
    """Plain (slope, intercept, R²) of log₁₀ y against log₁₀ x; y must be positive."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise InvalidArgument("need at least two matching (x, y) points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidArgument("log-log fit needs positive data")
    lx, ly = np.log10(x), np.log10(y)
    slope, intercept, model = _ols(lx, ly)
    r2 = float(np.clip(r2_score(ly, model.predict(lx.reshape(-1, 1))), 0.0, 1.0))
    return slope, intercept, r2


def scaling_fit(
    x: Sequence[float],
    samples: Sequence[Sequence[float]],
    rng: np.random.Generator,
    n_boot: int = BOOTSTRAP_RESAMPLES,
) -> ScalingFit:
    """
    Fit the scaling of mean(samples[i]) in x[i].

    Points whose mean is not positive cannot be log-transformed; they are
    dropped from the fit and listed on the result.
    """
    x = np.asarray(x, dtype=float)
    if len(samples) != x.shape[0]:
        raise InvalidArgument(f"{x.shape[0]} grid points but {len(samples)} sample groups")
    groups = [np.asarray(s, dtype=float) for s in samples]
    counts = np.array([g.size for g in groups])
    means = np.array([g.mean() if g.size else math.nan for g in groups])

    boot_means = np.full((n_boot, x.shape[0]), math.nan)
    for i, g in enumerate(groups):
        if g.size:
            idx = rng.integers(0, g.size, size=(n_boot, g.size))
            boot_means[:, i] = g[idx].mean(axis=1)
    stderrs = np.array([
        float(np.std(boot_means[:, i], ddof=1)) if counts[i] > 1 else math.nan
        for i in range(x.shape[0])
    ])

    keep = np.isfinite(means) & (means > 0)
    dropped = [float(v) for v in x[~keep]]
    if dropped:
        logger.warning("dropping %d grid point(s) with non-positive mean from the log-log fit", len(dropped))

    if keep.sum() < 2:
        return ScalingFit(math.nan, math.nan, math.nan, x, means, stderrs, counts, math.nan, dropped)

    slope, intercept, r2 = fit_loglog(x[keep], means[keep])

    boot_slopes = []
    lx = np.log10(x[keep])
    for b in range(n_boot):
        row = boot_means[b, keep]
        if np.all(row > 0):
            boot_slopes.append(_ols(lx, np.log10(row))[0])
    slope_stderr = float(np.std(boot_slopes, ddof=1)) if len(boot_slopes) > 1 else math.nan

    return ScalingFit(slope, intercept, r2, x, means, stderrs, counts, slope_stderr, dropped)
