from fairtune.harness.config import (
    ExperimentConfig,
    default_config,
    load_config,
    parse_config,
)
from fairtune.harness.jobs import RunJob, RunOutcome, build_data, execute_job
from fairtune.harness.pool import RunWorker, run_jobs
from fairtune.harness.report import SweepReport, SweepRow, aggregate_outcomes
from fairtune.harness.runner import (
    cmd_eval,
    cmd_gen_data,
    cmd_mask,
    cmd_run,
    cmd_sweep,
    sweep_points,
)
