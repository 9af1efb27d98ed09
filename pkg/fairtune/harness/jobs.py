import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fairtune.data.csv_io import load_csv_dataset
from fairtune.data.dataset import cell_counts, subsample_real
from fairtune.data.simulator import (
    default_synthetic_shift,
    generate_balanced_dataset,
    generate_domain_dataset,
    generate_test_set,
    generate_triplet,
    synthetic_spec,
)
from fairtune.errors import FairtuneError
from fairtune.harness.config import JTT
from fairtune.masks.serialize import save_mask
from fairtune.metrics.jtt import estimate_bias_ratio, probe_defaults
from fairtune.net.serialize import save_model
from fairtune.seeding import derive_seeds
from fairtune.training.config import Strategy, save_record
from fairtune.training.strategies import ExperimentData, StrategyConfigs, run_strategy


logger = logging.getLogger("fairtune")

## child index of derive_seeds(data_seed, n); 0..2 belong to the triplet
TEST_SEED, POOL_SEED, SUBSAMPLE_SEED, PROBE_SEED = 3, 4, 5, 6

TIMEOUT_ERROR = "TimeoutError: run exceeded the configured run_timeout"

DATASET_FILES = {
    "d_r": "d_r.csv",
    "d_s1": "d_s1.csv",
    "d_s2": "d_s2.csv",
    "test": "test.csv",
}


def data_seed(config, index):
    return derive_seeds(config.data_seed, PROBE_SEED + 1)[index]


def synthetic_shift(config):
    return default_synthetic_shift(config.real_spec.feature_dim, config.shift_magnitude)


def s1_bias_ratio(config):
    """D_S1 bias; with jtt it is one minus the estimated minority fraction"""
    if config.s1_bias_ratio != JTT:
        return config.resolved_s1_bias()
    real_seed = derive_seeds(config.data_seed, 3)[0]
    d_r = generate_domain_dataset(config.real_spec, real_seed)
    probe = probe_defaults(len(d_r), seed=data_seed(config, PROBE_SEED))
    return 1.0 - estimate_bias_ratio(config.arch, d_r, probe)


def build_data(config):
    """Triplet, test set and repairing pool for one experiment point"""
    bias = s1_bias_ratio(config)
    d_r, d_s1, d_s2 = generate_triplet(
        config.real_spec,
        bias_ratio_s1=bias,
        seed=config.data_seed,
        syn_ratio=config.syn_ratio * config.real_fraction,
        synthetic_shift=synthetic_shift(config),
        pool_per_cell=config.pool_per_cell,
    )
    d_r = subsample_real(d_r, config.real_fraction, data_seed(config, SUBSAMPLE_SEED))
    test = generate_test_set(
        config.real_spec, config.test_per_cell, data_seed(config, TEST_SEED)
    )
    pool = generate_balanced_dataset(
        synthetic_spec(config.real_spec, 0.5, synthetic_shift(config)),
        max(cell_counts(d_r).values()),
        data_seed(config, POOL_SEED),
    )
    return ExperimentData(d_r=d_r, d_s1=d_s1, d_s2=d_s2, test=test, pool=pool)


def load_data(directory):
    """Datasets written by gen-data; d_s2 doubles as the repairing pool"""
    directory = Path(directory)
    loaded = {
        name: load_csv_dataset(directory / filename)
        for name, filename in DATASET_FILES.items()
    }
    return ExperimentData(**loaded)


def strategy_configs(config, seed):
    pretrain_seed, finetune_seed, mask_seed, split_seed = derive_seeds(seed, 4)
    return StrategyConfigs(
        pretrain=config.pretrain.replace(seed=pretrain_seed),
        finetune=config.finetune.replace(seed=finetune_seed),
        learning_rates=config.learning_rates,
        validation_fraction=config.validation_fraction,
        k=config.k,
        k_fraction=config.k_fraction,
        criterion=config.criterion,
        random_fraction=config.random_fraction,
        block=config.block,
        mask_seed=mask_seed,
        split_seed=split_seed,
    )


@dataclass(frozen=True)
class RunJob:
    """One (sweep point, strategy, seed) cell of an experiment grid"""
    point: str
    value: object
    strategy: Strategy
    seed: int
    config: object
    data: ExperimentData = field(repr=False, compare=False, default=None)
    output_dir: Path = None
    ## set by the pool once the run outlived its timeout
    cancelled: threading.Event = field(
        default_factory=threading.Event, repr=False, compare=False
    )

    def __str__(self):
        return f"<RunJob {self.point} {self.strategy.value} seed-{self.seed}>"

    @property
    def relative_dir(self):
        return Path("runs") / self.point / self.strategy.value / f"seed-{self.seed}"


@dataclass
class RunOutcome:
    job: RunJob
    report: object = None
    record: object = None
    error: str = None

    @property
    def failed(self):
        return self.error is not None

    def to_dict(self):
        data = {
            "point": self.job.point,
            "strategy": self.job.strategy.value,
            "seed": self.job.seed,
        }
        if self.failed:
            data["error"] = self.error
        else:
            data["report"] = self.report.to_record()
        return data


def _persist(job, model, record):
    run_dir = job.output_dir / job.relative_dir
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise FairtuneError(f"cannot create run directory {run_dir}: {err}") from err
    save_model(model, run_dir / "model.json")
    if record.mask is not None:
        save_mask(record.mask, run_dir / "mask.json")
    record.final_model_ref = (job.relative_dir / "model.json").as_posix()
    save_record(record, run_dir / "record.json")


def write_failure(outcome):
    """failure.json in the run directory keeps failed cells visible on disk"""
    job = outcome.job
    if job.output_dir is None:
        return
    run_dir = job.output_dir / job.relative_dir
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "failure.json").write_text(
            json.dumps(outcome.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    except OSError as err:
        logger.error(f"cannot record failure of {job} in {run_dir}: {err}")


def execute_job(job):
    """
    Run one job and persist its artifacts. Library errors become a failed
    outcome; anything else propagates and crashes the worker.
    """
    logger.info(f"starting {job}")
    try:
        model, record, report = run_strategy(
            job.strategy,
            job.data,
            job.config.arch,
            strategy_configs(job.config, job.seed),
        )
        record.details["seed"] = job.seed
        if job.cancelled.is_set():
            logger.warning(f"{job} finished after its timeout, artifacts discarded")
            return RunOutcome(job=job, error=TIMEOUT_ERROR)
        if job.output_dir is not None:
            _persist(job, model, record)
    except FairtuneError as err:
        logger.error(f"{job} failed: {err}")
        outcome = RunOutcome(job=job, error=f"{type(err).__name__}: {err}")
        write_failure(outcome)
        return outcome
    return RunOutcome(job=job, report=report, record=record)
