"""
Task Scheduler for LQR-PG sweeps

Features:
- Async job queue with bounded concurrent execution
- Job status tracking
- Deterministic merge: results_in_order() sorts by each job's order key
- Non-blocking job submission
"""

import asyncio
import time
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, Iterable, List, Optional

from console import get_logger
from errors import InvalidArgument
from .executor_base import BaseExecutor, JobContext, JobResult, JobStatus

logger = get_logger("executor.scheduler")


@dataclass
class ScheduledJob:
    """Job in the scheduler queue."""
    context: JobContext
    executor: BaseExecutor
    result: Optional[JobResult] = None
    submitted_at: datetime = field(default_factory=datetime.now)
    started_at: Optional[datetime] = None


class TaskScheduler:
    """
    Async job scheduler with a concurrency cap.

    Must be constructed inside a running event loop.
    """

    def __init__(self, max_concurrent_tasks: int = 4):
        if max_concurrent_tasks < 1:
            raise InvalidArgument(f"need at least one worker, got {max_concurrent_tasks}")
        self.max_concurrent_tasks = max_concurrent_tasks
        self._jobs: Dict[str, ScheduledJob] = {}
        self._pending: Dict[str, asyncio.Task] = {}
        self._slots = asyncio.Semaphore(max_concurrent_tasks)
        self._active = 0
        self._closed = False

    async def _execute_job(self, job: ScheduledJob) -> None:
        context = job.context
        async with self._slots:
            self._active += 1
            job.started_at = datetime.now()
            job.result = JobResult(job_id=context.job_id, order=context.order, status=JobStatus.RUNNING)
            start_time = time.time()
            try:
                job.result = await job.executor.execute(context)
            except Exception as e:
                logger.warning("executor %s raised on job %s: %s", job.executor.name, context.job_id, e)
                job.result = JobResult(
                    job_id=context.job_id,
                    order=context.order,
                    status=JobStatus.FAILED,
                    error=str(e),
                    latency_ms=(time.time() - start_time) * 1000,
                )
            finally:
                self._active -= 1

    async def submit_task(self, context: JobContext, executor: BaseExecutor) -> str:
        """
        Queue a job for execution.

        Returns:
            Job ID for tracking
        """
        if self._closed:
            raise InvalidArgument("scheduler is shut down")
        if context.job_id in self._jobs:
            raise InvalidArgument(f"duplicate job id {context.job_id}")

        job = ScheduledJob(context=context, executor=executor)
        self._jobs[context.job_id] = job
        self._pending[context.job_id] = asyncio.create_task(self._execute_job(job))
        logger.debug("queued job %s %s", context.kind, context.order)
        return context.job_id

    def get_task_status(self, job_id: str) -> Optional[JobStatus]:
        job = self._jobs.get(job_id)
        if job is None:
            return None
        return JobStatus.QUEUED if job.result is None else job.result.status

    def get_task_result(self, job_id: str) -> Optional[JobResult]:
        job = self._jobs.get(job_id)
        return None if job is None else job.result

    def get_active_tasks_count(self) -> int:
        return self._active

    async def wait_for_task(self, job_id: str, timeout: Optional[float] = None) -> Optional[JobResult]:
        """Result once the job finishes, or None on timeout."""
        task = self._pending.get(job_id)
        if task is None:
            return self.get_task_result(job_id)
        try:
            await asyncio.wait_for(asyncio.shield(task), timeout=timeout)
        except asyncio.TimeoutError:
            return None
        return self.get_task_result(job_id)

    async def wait_for_all_tasks(self, timeout: Optional[float] = None) -> bool:
        """True if every submitted job finished within the timeout."""
        tasks = list(self._pending.values())
        if not tasks:
            return True
        done, pending = await asyncio.wait(tasks, timeout=timeout)
        return not pending

    def results_in_order(self) -> List[JobResult]:
        """Finished results sorted by order key."""
        finished = [j.result for j in self._jobs.values()
                    if j.result is not None and j.result.status not in (JobStatus.QUEUED, JobStatus.RUNNING)]
        return sorted(finished, key=lambda r: r.order)

    async def shutdown(self, timeout: Optional[float] = 5.0) -> None:
        """Stop accepting jobs, wait for running ones, cancel the rest."""
        self._closed = True
        finished = await self.wait_for_all_tasks(timeout=timeout)
        if not finished:
            for task in self._pending.values():
                task.cancel()
            await asyncio.gather(*self._pending.values(), return_exceptions=True)


async def run_jobs(
    contexts: Iterable[JobContext],
    executor: BaseExecutor,
    max_concurrent_tasks: int,
) -> List[JobResult]:
    """Submit every job, wait, and return results sorted by order key."""
    scheduler = TaskScheduler(max_concurrent_tasks=max_concurrent_tasks)
    try:
        for context in contexts:
            await scheduler.submit_task(context, executor)
        await scheduler.wait_for_all_tasks()
        return scheduler.results_in_order()
    finally:
        await scheduler.shutdown()


def run_jobs_sync(
    contexts: Iterable[JobContext],
    executor: BaseExecutor,
    max_concurrent_tasks: int,
) -> List[JobResult]:
    """run_jobs from synchronous code."""
    return asyncio.run(run_jobs(list(contexts), executor, max_concurrent_tasks))
