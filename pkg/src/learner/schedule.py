"""
Parameter schedule of the online policy gradient learner.

theorem1_schedule() evaluates the theoretical parameters for a horizon T and
confidence δ. Those constants are far too conservative to run at desk scale
(m₀ carries 2¹⁷κ²⁰), so ScheduleOverrides can pin or rescale them; the
theoretical values always stay on the Schedule for reporting.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from console import get_logger
from errors import InvalidArgument
from lqr.regularity import RegularityConstants

logger = get_logger("learner.schedule")

# Guards ceil() against m₀ρ^{−2j} landing a rounding error above an integer
_CEIL_GUARD = 1e-12


@dataclass(frozen=True)
class ScheduleOverrides:
    """
    Desk-scale adjustments.

    Pins replace a theoretical value; multipliers then scale the result.
    mu and D0 can only be pinned.
    """
    eta_mult: float = 1.0
    r0_mult: float = 1.0
    m0_mult: float = 1.0
    tau_mult: float = 1.0
    eta: Optional[float] = None
    r0: Optional[float] = None
    m0: Optional[float] = None
    tau: Optional[int] = None
    mu: Optional[float] = None
    D0: Optional[float] = None

    def __post_init__(self):
        for name in ("eta_mult", "r0_mult", "m0_mult", "tau_mult"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("eta", "r0", "m0", "tau", "mu", "D0"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise InvalidArgument(f"{name} pin must be positive, got {value}")

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "ScheduleOverrides":
        if not data:
            return cls()
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgument(f"unknown schedule override(s): {', '.join(sorted(unknown))}")
        return cls(**data)

    def with_multipliers(self, **mults: Optional[float]) -> "ScheduleOverrides":
        """Copy with the given multipliers applied on top of the existing ones."""
        changes = {k: getattr(self, k) * v for k, v in mults.items() if v is not None}
        return replace(self, **changes)

    @property
    def is_identity(self) -> bool:
        return self == ScheduleOverrides()


@dataclass(frozen=True)
class TheoreticalSchedule:
    """Unmodified theoretical parameters."""
    eta: float
    tau: int
    mu: float
    r0: float
    m0: float
    D0: float


@dataclass(frozen=True)
class Schedule:
    """Effective parameters of one learning run."""
    eta: float
    tau: int
    mu: float
    r0: float
    m0: int
    rho: float
    delta: float
    nu: float
    D0: float
    T: int
    W_bound: float
    theoretical: TheoreticalSchedule
    overrides: ScheduleOverrides = field(default_factory=ScheduleOverrides)
    r0_clamped: bool = False
    eta_cap: float = math.inf  # min(1/β, 4/μ, D₀/2G)
    regret_bound_scale: float = math.nan

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise InvalidArgument(f"decay factor 1 - mu*eta/3 = {self.rho:.6g} must lie in (0, 1)")
        if self.tau < 1 or self.m0 < 1:
            raise InvalidArgument(f"need tau >= 1 and m0 >= 1, got tau={self.tau}, m0={self.m0}")

    def radius(self, j: int) -> float:
        """r_j = r₀ ρ^{j/2}."""
        return self.r0 * self.rho ** (j / 2.0)

    def subepochs(self, j: int) -> int:
        """m_j = ceil(m₀ ρ^{−2j})."""
        return int(math.ceil(self.m0 * self.rho ** (-2.0 * j) * (1.0 - _CEIL_GUARD)))

    def grad_error_envelope(self, j: int) -> float:
        """√(μν)/4 · ρ^{j/2}: high-probability bound on ‖g_j − ∇J(K_j)‖_F."""
        return math.sqrt(self.mu * self.nu) / 4.0 * self.rho ** (j / 2.0)

    @property
    def theoretical_only(self) -> bool:
        """True when not even epoch 0 fits in the horizon."""
        return self.m0 * self.tau > self.T

    @property
    def eta_within_cap(self) -> bool:
        return self.eta <= self.eta_cap * (1 + 1e-12)


def theorem1_schedule(
    consts: RegularityConstants,
    T: int,
    delta: float,
    d_x: int,
    d_u: int,
    W_bound: float,
    overrides: Optional[ScheduleOverrides] = None,
) -> Schedule:
    """
    Theoretical parameters, then overrides, then r₀ clamped to D₀.

    η = α₀/(128νψ²κ¹⁰), τ = ceil(2κ² log(7κT)), μ = 4ν/κ⁴,
    r₀ = α₀/(448√d_x ψ²κ¹⁰), √m₀ = 2¹⁷ d_u d_x^{3/2} ψ²κ²⁰W²/(α₀σ²) · √log(240T⁴/δ).

    Raises:
        InvalidArgument: if T < 1, δ ∉ (0, 1) or the overridden decay leaves (0, 1)
    """
    if T < 1:
        raise InvalidArgument(f"horizon must be >= 1, got {T}")
    if not 0 < delta < 1:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")
    if not W_bound > 0:
        raise InvalidArgument(f"noise bound W must be positive, got {W_bound}")

    overrides = overrides or ScheduleOverrides()
    nu, alpha0, psi, sigma_sq, kappa = consts.nu, consts.alpha0, consts.psi, consts.sigma_sq, consts.kappa

    sqrt_m0 = (
        2.0 ** 17 * d_u * d_x ** 1.5 * psi ** 2 * kappa ** 20 * W_bound ** 2 / (alpha0 * sigma_sq)
        * math.sqrt(math.log(240.0 * T ** 4 / delta))
    )
    theory = TheoreticalSchedule(
        eta=alpha0 / (128.0 * nu * psi ** 2 * kappa ** 10),
        tau=int(math.ceil(2.0 * kappa ** 2 * math.log(7.0 * kappa * T))),
        mu=4.0 * nu / kappa ** 4,
        r0=alpha0 / (448.0 * math.sqrt(d_x) * psi ** 2 * kappa ** 10),
        m0=sqrt_m0 ** 2,
        D0=consts.D0,
    )

    def pick(pin, value):
        return value if pin is None else pin

    eta = pick(overrides.eta, theory.eta) * overrides.eta_mult
    mu = pick(overrides.mu, theory.mu)
    D0 = pick(overrides.D0, theory.D0)
    r0 = pick(overrides.r0, theory.r0) * overrides.r0_mult
    tau = max(1, int(math.ceil(pick(overrides.tau, theory.tau) * overrides.tau_mult * (1.0 - _CEIL_GUARD))))
    m0 = max(1, int(math.ceil(pick(overrides.m0, theory.m0) * overrides.m0_mult * (1.0 - _CEIL_GUARD))))

    r0_clamped = r0 > D0
    if r0_clamped:
        logger.warning("exploration radius r0 = %.4g exceeds D0 = %.4g; clamping", r0, D0)
        r0 = D0

    eta_cap = min(1.0 / consts.beta, 4.0 / mu, D0 / (2.0 * consts.G))
    regret_bound_scale = (
        d_u * d_x ** 1.5 * psi ** 4 * kappa ** 36 * W_bound ** 2 / alpha0
        * math.sqrt(T * theory.tau * math.log(T / delta))
    ) if T / delta > 1 else math.nan

    schedule = Schedule(
        eta=eta,
        tau=tau,
        mu=mu,
        r0=r0,
        m0=m0,
        rho=1.0 - mu * eta / 3.0,
        delta=delta,
        nu=nu,
        D0=D0,
        T=int(T),
        W_bound=float(W_bound),
        theoretical=theory,
        overrides=overrides,
        r0_clamped=r0_clamped,
        eta_cap=eta_cap,
        regret_bound_scale=regret_bound_scale,
    )

    if schedule.theoretical_only:
        logger.warning(
            "schedule is theoretical-only: m0 * tau = %.3g exceeds T = %d; use desk-scale overrides",
            float(m0) * tau, T,
        )
    if not schedule.eta_within_cap:
        logger.warning("eta = %.4g exceeds the descent precondition min(1/beta, 4/mu, D0/2G) = %.4g", eta, eta_cap)

    return schedule


@dataclass(frozen=True)
class EpochPlan:
    """Planned length of one epoch."""
    j: int
    r: float
    m: int
    steps: int  # rounds actually played, m·τ unless truncated
    truncated: bool


def epoch_plan(schedule: Schedule, T: int) -> List[EpochPlan]:
    """
    Epochs j = 0, 1, ... until the horizon is filled.

    Every epoch but the last plays m_j·τ rounds; the last is cut at T.
    """
    plan: List[EpochPlan] = []
    used = 0
    j = 0
    while used < T:
        m = schedule.subepochs(j)
        full = m * schedule.tau
        steps = min(full, T - used)
        plan.append(EpochPlan(j=j, r=schedule.radius(j), m=m, steps=steps, truncated=steps < full))
        used += steps
        j += 1
    return plan


def epoch_sqrt_sum(schedule: Schedule, T: int) -> Tuple[float, float]:
    """
    Σ_j √m_j over the epochs needed for T rounds, and the bound 22√(T/τ)/(μη).

    The bound applies when ρ ∈ [2/3, 1); m_j is taken unrounded.
    """
    plan = epoch_plan(schedule, T)
    total = sum(math.sqrt(schedule.m0 * schedule.rho ** (-2.0 * p.j)) for p in plan)
    bound = 22.0 / (schedule.mu * schedule.eta) * math.sqrt(T / schedule.tau)
    return total, bound
