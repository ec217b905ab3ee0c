"""
Executor for regret runs.

One job = one (T, seed, policy) point of a sweep. The job's value is the
total regret; diverged learner runs come back with status DIVERGED and the
reason in metadata instead of failing the whole sweep.
"""

import time
from enum import Enum

from errors import LearnerDiverged
from learner.online_pg import regret, run, run_fixed
from .executor_base import BaseExecutor, JobContext, JobResult, JobStatus


class Policy(Enum):
    LEARNER = "learner"
    FIXED = "fixed"
    OPTIMAL = "optimal"


class RegretRunExecutor(BaseExecutor):
    """
    Params of a job:
        system, T, streams, J_star, policy (Policy)
        schedule and K0 for LEARNER; K for FIXED and OPTIMAL
    """

    def _play(self, params):
        policy = params["policy"]
        if policy == Policy.LEARNER:
            return run(params["system"], params["K0"], params["schedule"], params["T"],
                       params["streams"], J_star=params["J_star"])
        return run_fixed(params["system"], params["K"], params["T"], params["streams"], J_star=params["J_star"])

    async def execute(self, context: JobContext) -> JobResult:
        async def work():
            start_time = time.time()
            try:
                trace = await self._run_in_thread(context, self._play, context.params)
            except LearnerDiverged as e:
                return JobResult(
                    job_id=context.job_id,
                    order=context.order,
                    status=JobStatus.DIVERGED,
                    error=str(e),
                    latency_ms=(time.time() - start_time) * 1000,
                    metadata={"epoch": e.epoch, "reason": e.reason},
                )
            last = trace.epoch_records[-1] if trace.epoch_records else None
            return self._create_success_result(
                context,
                regret(trace),
                (time.time() - start_time) * 1000,
                metadata={
                    "J_last": last.J_K if last is not None else float("nan"),
                    "epochs": len(trace.epoch_records),
                    "max_state_norm": trace.max_state_norm,
                },
            )

        return await self._execute_guarded(context, work())
