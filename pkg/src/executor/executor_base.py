"""
Base Executor Interface for LQR-PG sweep jobs

Provides:
- JobContext: One unit of work (a learner run, a rollout batch, ...)
- JobResult: Structured job outcome
- JobStatus: Job state tracking
- BaseExecutor: Abstract base class for all executors
"""

import asyncio
import time
import uuid
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

from console import get_logger
from errors import InvalidArgument

logger = get_logger("executor")


class JobStatus(Enum):
    """Job execution status."""
    QUEUED = "queued"
    RUNNING = "running"
    SUCCESS = "success"
    DIVERGED = "diverged"
    FAILED = "failed"
    TIMEOUT = "timeout"


@dataclass
class JobContext:
    """
    Inputs of one job.

    `order` is the merge key: results are reported sorted by it, whatever
    order the jobs finish in.
    """
    kind: str
    order: Tuple
    params: Dict[str, Any] = field(default_factory=dict)
    job_id: str = field(default_factory=lambda: str(uuid.uuid4())[:8])
    timeout_seconds: Optional[float] = None

    def __post_init__(self):
        if not self.kind:
            raise InvalidArgument("job kind is required")
        if self.timeout_seconds is not None and not self.timeout_seconds > 0:
            raise InvalidArgument(f"timeout must be positive, got {self.timeout_seconds}")


@dataclass
class JobResult:
    """Outcome of one job."""
    job_id: str
    order: Tuple
    status: JobStatus
    value: Any = None
    error: str = ""
    latency_ms: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def is_success(self) -> bool:
        return self.status == JobStatus.SUCCESS

    def is_failed(self) -> bool:
        return self.status in (JobStatus.FAILED, JobStatus.TIMEOUT)


class BaseExecutor(ABC):
    """
    Abstract base class for all executors.

    Concrete executors implement execute(); CPU-bound work goes through
    _run_in_thread so the event loop keeps scheduling other jobs.
    """

    def __init__(self):
        self.name = self.__class__.__name__

    @abstractmethod
    async def execute(self, context: JobContext) -> JobResult:
        """Run one job and report its result; must not raise."""

    async def _run_in_thread(self, context: JobContext, fn: Callable, *args, **kwargs):
        """Run fn in a worker thread, honouring the job timeout."""
        call = asyncio.to_thread(fn, *args, **kwargs)
        if context.timeout_seconds is None:
            return await call
        return await asyncio.wait_for(call, timeout=context.timeout_seconds)

    async def _execute_guarded(self, context: JobContext, coro) -> JobResult:
        """Await coro, turning timeouts and stray exceptions into results."""
        start_time = time.time()
        try:
            return await coro
        except asyncio.TimeoutError:
            return JobResult(
                job_id=context.job_id,
                order=context.order,
                status=JobStatus.TIMEOUT,
                error=f"job timed out after {context.timeout_seconds}s",
                latency_ms=(time.time() - start_time) * 1000,
            )
        except Exception as e:
            logger.warning("job %s %s failed: %s", context.kind, context.order, e)
            return self._create_error_result(context, f"{type(e).__name__}: {e}", (time.time() - start_time) * 1000)

    def _create_success_result(
        self,
        context: JobContext,
        value: Any,
        latency_ms: float,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> JobResult:
        return JobResult(
            job_id=context.job_id,
            order=context.order,
            status=JobStatus.SUCCESS,
            value=value,
            latency_ms=latency_ms,
            metadata=metadata or {},
        )

    def _create_error_result(self, context: JobContext, error: str, latency_ms: float) -> JobResult:
        return JobResult(
            job_id=context.job_id,
            order=context.order,
            status=JobStatus.FAILED,
            error=error,
            latency_ms=latency_ms,
        )


class FunctionExecutor(BaseExecutor):
    """
    Runs `params["fn"](**params["kwargs"])` in a thread.

    Used for sweep grids whose jobs are plain functions.
    """

    async def execute(self, context: JobContext) -> JobResult:
        async def work():
            start_time = time.time()
            fn = context.params["fn"]
            value = await self._run_in_thread(context, fn, **context.params.get("kwargs", {}))
            return self._create_success_result(context, value, (time.time() - start_time) * 1000)

        return await self._execute_guarded(context, work())
