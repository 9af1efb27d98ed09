import asyncio
import logging
from contextlib import suppress

from fairtune.actors.actor import Actor
from fairtune.actors.custom.routers import ROUTERS
from fairtune.actors.supervisor import RESTART, Gru
from fairtune.errors import ConfigurationError
from fairtune.harness.jobs import TIMEOUT_ERROR, RunOutcome, execute_job, write_failure


logger = logging.getLogger("fairtune")


class RunWorker(Actor):
    """
    Executes one job per message in a worker thread. A thread cannot be
    interrupted: on timeout the job is flagged so it skips persisting, and
    the worker stays busy until the thread returns.
    """
    async def handle_message(self, message, sender):
        work = asyncio.ensure_future(asyncio.to_thread(self.context.execute, message))
        try:
            return await asyncio.shield(work)
        except asyncio.CancelledError:
            message.cancelled.set()
            self._logger.warning(f"{message} abandoned, waiting for its thread")
            with suppress(Exception):
                await work
            raise


def _describe(err):
    if isinstance(err, asyncio.TimeoutError):
        return TIMEOUT_ERROR
    if isinstance(err, asyncio.CancelledError):
        return "CancelledError: worker pool shut down before the run finished"
    return f"{type(err).__name__}: {err}"


async def run_jobs(
    jobs,
    workers=1,
    timeout=None,
    routing="shortest_queue",
    execute=execute_job,
):
    """
    Dispatch jobs over a supervised pool of RunWorker actors and return
    one RunOutcome per job, in job order.
    """
    jobs = list(jobs)
    if workers < 1:
        raise ConfigurationError(f"workers must be positive, got {workers}")
    if routing not in ROUTERS:
        raise ConfigurationError(f"unknown routing '{routing}'")
    if not jobs:
        return []

    async with Gru(join=False, name="fairtune") as root:
        router = root.spawn_child(
            ROUTERS[routing],
            policy=RESTART,
            name="runs",
            children=[
                RunWorker.prepare(
                    name=f"worker-{index}",
                    actor_timeout=timeout,
                    execute=execute,
                )
                for index in range(workers)
            ],
        )
        logger.info(f"dispatching {len(jobs)} runs over {workers} workers")
        pending = [router(job, root) for job in jobs]
        answers = await asyncio.gather(*pending, return_exceptions=True)
        await root.stop()

    outcomes = []
    for job, answer in zip(jobs, answers):
        if isinstance(answer, BaseException):
            logger.error(f"{job} failed: {_describe(answer)}")
            answer = RunOutcome(job=job, error=_describe(answer))
            write_failure(answer)
        outcomes.append(answer)
    return outcomes
