"""
Error types for LQR-PG.

All library failures derive from LqrPgError so callers (and the CLI exit-code
mapping) can catch the whole family at once.
"""

from typing import Any, Optional


class LqrPgError(Exception):
    """Base class for all LQR-PG errors."""


class InvalidArgument(LqrPgError, ValueError):
    """An input violates a documented precondition."""


class Unstable(LqrPgError):
    """Closed-loop matrix A + BK is not strictly stable."""

    def __init__(self, spectral_radius: float):
        self.spectral_radius = float(spectral_radius)
        super().__init__(f"closed loop is unstable: spectral radius {self.spectral_radius:.6g} >= 1")


class NoConvergence(LqrPgError):
    """Fixed-point iteration exhausted its budget before reaching tolerance."""

    def __init__(self, iterations: int, residual: float, what: str = "fixed point"):
        self.iterations = iterations
        self.residual = float(residual)
        super().__init__(f"{what} did not converge after {iterations} iterations (residual {self.residual:.3e})")


class NumericOverflow(LqrPgError):
    """State norm exploded during a rollout."""

    def __init__(self, t: int, norm: float):
        self.t = t
        self.norm = float(norm)
        super().__init__(f"state norm {self.norm:.3e} exceeded overflow guard at step {t}")


class DivergenceDetected(LqrPgError):
    """Corrupted gradient descent left its sub-level set."""

    def __init__(self, step: int, value: float, f_bar: float):
        self.step = step
        self.value = float(value)
        self.f_bar = float(f_bar)
        super().__init__(f"f(x_{step}) = {self.value:.6g} exceeds sub-level bound {self.f_bar:.6g}")


class LearnerDiverged(LqrPgError):
    """Online learner produced an inadmissible controller or an exploding state.

    The partial trace collected up to the failure is attached.
    """

    def __init__(self, epoch: int, reason: str, trace: Optional[Any] = None):
        self.epoch = epoch
        self.reason = reason
        self.trace = trace
        super().__init__(f"learner diverged in epoch {epoch}: {reason}")
