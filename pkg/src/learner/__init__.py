"""
LQR-PG Learner Module
Epoch-structured online policy gradient with its parameter schedule.

Exports:
- ScheduleOverrides, Schedule, theorem1_schedule, epoch_plan, epoch_sqrt_sum
- OnlinePolicyGradient, EpochRecord, RegretTrace, run, run_fixed, regret
- write_trace_csv, write_epoch_csv
"""

from .schedule import (
    EpochPlan,
    Schedule,
    ScheduleOverrides,
    TheoreticalSchedule,
    epoch_plan,
    epoch_sqrt_sum,
    theorem1_schedule,
)
from .online_pg import (
    EpochRecord,
    OnlinePolicyGradient,
    RegretTrace,
    regret,
    run,
    run_fixed,
)
from .export import EPOCH_COLUMNS, TRACE_COLUMNS, write_epoch_csv, write_trace_csv

__all__ = [
    "EpochPlan",
    "Schedule",
    "ScheduleOverrides",
    "TheoreticalSchedule",
    "epoch_plan",
    "epoch_sqrt_sum",
    "theorem1_schedule",
    "EpochRecord",
    "OnlinePolicyGradient",
    "RegretTrace",
    "regret",
    "run",
    "run_fixed",
    "EPOCH_COLUMNS",
    "TRACE_COLUMNS",
    "write_epoch_csv",
    "write_trace_csv",
]
