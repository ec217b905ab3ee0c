"""
Tests for the sweep worker pool

Testing:
1. Job context creation and validation
2. Executor interface, errors and timeouts
3. Scheduler concurrency cap and status tracking
4. Deterministic merge order
5. Regret-run jobs, including diverged learners
"""

import asyncio
import math
import sys
import time
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from errors import InvalidArgument
from executor import (
    BaseExecutor,
    FunctionExecutor,
    JobContext,
    JobResult,
    JobStatus,
    Policy,
    RegretRunExecutor,
    TaskScheduler,
    run_jobs,
    run_jobs_sync,
)
from experiments.benchmarks import benchmark
from experiments.config import profile_overrides
from learner import ScheduleOverrides, theorem1_schedule
from lqr import constants_for_system, solve_optimal
from rng import SeedStreams


# ==================== FIXTURES ====================

class SleepyExecutor(BaseExecutor):
    """Sleeps params["delay"] seconds and returns the order key."""

    async def execute(self, context: JobContext) -> JobResult:
        await asyncio.sleep(context.params.get("delay", 0.01))
        return self._create_success_result(context, context.order, 10.0)


@pytest.fixture
def sleepy():
    return SleepyExecutor()


@pytest.fixture
async def scheduler():
    """Task scheduler instance for testing."""
    scheduler = TaskScheduler(max_concurrent_tasks=5)
    yield scheduler
    await scheduler.shutdown()


@pytest.fixture(scope="module")
def scalar_jobs():
    """Parameters shared by the regret-run jobs."""
    loaded = benchmark("scalar")
    consts = constants_for_system(loaded.system, loaded.K0)
    K_star, J_star = solve_optimal(loaded.system)
    return loaded, consts, K_star, J_star


# ==================== CONTEXT ====================

def test_job_context_defaults():
    context = JobContext(kind="regret", order=(1000, 0, 0))
    assert context.params == {}
    assert context.timeout_seconds is None
    assert len(context.job_id) > 0


def test_job_ids_are_unique():
    ids = {JobContext(kind="regret", order=(i,)).job_id for i in range(50)}
    assert len(ids) == 50


@pytest.mark.parametrize("kwargs", [dict(kind="", order=(0,)), dict(kind="x", order=(0,), timeout_seconds=0)])
def test_job_context_validation(kwargs):
    with pytest.raises(InvalidArgument):
        JobContext(**kwargs)


def test_job_result_predicates():
    assert JobResult(job_id="a", order=(0,), status=JobStatus.SUCCESS).is_success()
    assert JobResult(job_id="a", order=(0,), status=JobStatus.TIMEOUT).is_failed()
    diverged = JobResult(job_id="a", order=(0,), status=JobStatus.DIVERGED)
    assert not diverged.is_success() and not diverged.is_failed()


# ==================== EXECUTORS ====================

async def test_executor_interface(sleepy):
    assert asyncio.iscoroutinefunction(sleepy.execute)
    result = await sleepy.execute(JobContext(kind="test", order=(3,)))
    assert result.status == JobStatus.SUCCESS
    assert result.value == (3,)
    assert result.latency_ms >= 0


async def test_function_executor_runs_in_thread():
    context = JobContext(kind="fn", order=(0,), params={"fn": lambda a, b: a * b, "kwargs": {"a": 6, "b": 7}})
    result = await FunctionExecutor().execute(context)
    assert result.is_success()
    assert result.value == 42


async def test_function_executor_reports_errors():
    def boom():
        raise ValueError("Simulated error")

    result = await FunctionExecutor().execute(JobContext(kind="fn", order=(0,), params={"fn": boom}))
    assert result.status == JobStatus.FAILED
    assert "Simulated error" in result.error


async def test_function_executor_timeout():
    context = JobContext(kind="fn", order=(0,), params={"fn": time.sleep, "kwargs": {"secs": 0.5}},
                         timeout_seconds=0.05)
    result = await FunctionExecutor().execute(context)
    assert result.status == JobStatus.TIMEOUT


# ==================== SCHEDULER ====================

async def test_scheduler_initialization(scheduler):
    assert scheduler.max_concurrent_tasks == 5
    assert scheduler.get_active_tasks_count() == 0


def test_scheduler_needs_a_worker():
    with pytest.raises(InvalidArgument):
        TaskScheduler(max_concurrent_tasks=0)


async def test_scheduler_status_tracking(scheduler, sleepy):
    context = JobContext(kind="test", order=(0,), params={"delay": 0.02})
    job_id = await scheduler.submit_task(context, sleepy)
    assert scheduler.get_task_status(job_id) in (JobStatus.QUEUED, JobStatus.RUNNING)
    result = await scheduler.wait_for_task(job_id)
    assert result.status == JobStatus.SUCCESS
    assert scheduler.get_task_status(job_id) == JobStatus.SUCCESS
    assert scheduler.get_task_status("missing") is None


async def test_scheduler_concurrent_execution(scheduler, sleepy):
    start_time = time.time()
    for i in range(3):
        await scheduler.submit_task(JobContext(kind="test", order=(i,), params={"delay": 0.1}), sleepy)
    assert await scheduler.wait_for_all_tasks(timeout=2.0)
    elapsed = time.time() - start_time
    assert elapsed < 0.28, f"jobs should run concurrently, took {elapsed}s"


async def test_scheduler_max_concurrent_limit():
    scheduler = TaskScheduler(max_concurrent_tasks=2)

    class CountingExecutor(BaseExecutor):
        active_count = 0
        max_seen = 0

        async def execute(self, context: JobContext) -> JobResult:
            CountingExecutor.active_count += 1
            CountingExecutor.max_seen = max(CountingExecutor.max_seen, CountingExecutor.active_count)
            await asyncio.sleep(0.03)
            CountingExecutor.active_count -= 1
            return self._create_success_result(context, None, 30.0)

    executor = CountingExecutor()
    for i in range(6):
        await scheduler.submit_task(JobContext(kind="test", order=(i,)), executor)
    await scheduler.wait_for_all_tasks()
    assert CountingExecutor.max_seen == 2
    await scheduler.shutdown()


async def test_results_sorted_by_order_not_completion(scheduler, sleepy):
    """Jobs finish in reverse order but come back sorted."""
    for i in range(4):
        await scheduler.submit_task(JobContext(kind="test", order=(i,), params={"delay": 0.08 - 0.02 * i}), sleepy)
    await scheduler.wait_for_all_tasks()
    assert [r.order for r in scheduler.results_in_order()] == [(0,), (1,), (2,), (3,)]


async def test_duplicate_job_rejected(scheduler, sleepy):
    context = JobContext(kind="test", order=(0,))
    await scheduler.submit_task(context, sleepy)
    with pytest.raises(InvalidArgument):
        await scheduler.submit_task(context, sleepy)


async def test_no_submissions_after_shutdown(sleepy):
    scheduler = TaskScheduler(max_concurrent_tasks=1)
    await scheduler.shutdown()
    with pytest.raises(InvalidArgument):
        await scheduler.submit_task(JobContext(kind="test", order=(0,)), sleepy)


async def test_raising_executor_becomes_failed_result(scheduler):
    class RaisingExecutor(BaseExecutor):
        async def execute(self, context):
            raise RuntimeError("executor bug")

    job_id = await scheduler.submit_task(JobContext(kind="test", order=(0,)), RaisingExecutor())
    result = await scheduler.wait_for_task(job_id)
    assert result.status == JobStatus.FAILED
    assert "executor bug" in result.error


async def test_run_jobs_merges_in_order(sleepy):
    contexts = [JobContext(kind="test", order=(k,), params={"delay": 0.001 * (5 - k)}) for k in range(5)]
    results = await run_jobs(contexts, sleepy, max_concurrent_tasks=3)
    assert [r.value for r in results] == [(k,) for k in range(5)]


# ==================== REGRET RUNS ====================

def test_regret_run_executor(scalar_jobs):
    loaded, consts, K_star, J_star = scalar_jobs
    system = loaded.system
    schedule = theorem1_schedule(consts, 2000, 0.01, 1, 1, system.noise.bound_W,
                                 profile_overrides("desk", "scalar"))
    contexts = []
    for seed in range(2):
        streams = SeedStreams(0).child(2000, seed)
        for k, policy in enumerate(Policy):
            params = {"system": system, "T": 2000, "streams": streams, "J_star": J_star, "policy": policy}
            if policy == Policy.LEARNER:
                params.update(schedule=schedule, K0=loaded.K0)
            else:
                params["K"] = loaded.K0 if policy == Policy.FIXED else K_star
            contexts.append(JobContext(kind="regret", order=(2000, seed, k), params=params))

    results = run_jobs_sync(contexts, RegretRunExecutor(), max_concurrent_tasks=3)
    assert [r.order for r in results] == sorted(c.order for c in contexts)
    assert all(r.is_success() for r in results)
    assert all(math.isfinite(r.value) for r in results)
    assert all("J_last" in r.metadata for r in results)

    again = run_jobs_sync(contexts[:3], RegretRunExecutor(), max_concurrent_tasks=1)
    assert [r.value for r in again] == [r.value for r in results[:3]]


def test_regret_run_reports_divergence(scalar_jobs):
    loaded, consts, _, J_star = scalar_jobs
    system = loaded.system
    schedule = theorem1_schedule(consts, 4000, 0.01, 1, 1, system.noise.bound_W,
                                 ScheduleOverrides(eta=100.0, mu=0.01, r0=0.2, D0=0.3, m0=200, tau=8))
    context = JobContext(kind="regret", order=(4000, 0, 0), params={
        "system": system, "T": 4000, "streams": SeedStreams(0), "J_star": J_star,
        "policy": Policy.LEARNER, "schedule": schedule, "K0": loaded.K0,
    })
    [result] = run_jobs_sync([context], RegretRunExecutor(), max_concurrent_tasks=1)
    assert result.status == JobStatus.DIVERGED
    assert result.metadata["epoch"] == 1
