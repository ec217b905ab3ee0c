"""
LQR-PG Executor Module
Bounded worker pool for sweep grids.

Exports:
- BaseExecutor: Abstract base class for executors
- JobContext, JobResult, JobStatus
- TaskScheduler: Async job queue with deterministic merge
- RegretRunExecutor, FunctionExecutor
"""

from .executor_base import (
    BaseExecutor,
    FunctionExecutor,
    JobContext,
    JobResult,
    JobStatus,
)
from .task_scheduler import ScheduledJob, TaskScheduler, run_jobs, run_jobs_sync
from .run_executor import Policy, RegretRunExecutor

__all__ = [
    "BaseExecutor",
    "FunctionExecutor",
    "JobContext",
    "JobResult",
    "JobStatus",
    "ScheduledJob",
    "TaskScheduler",
    "run_jobs",
    "run_jobs_sync",
    "Policy",
    "RegretRunExecutor",
]
