import logging

from fairtune.metrics.fairness import error_set
from fairtune.errors import PreconditionError
from fairtune.training.config import Strategy, TrainConfig
from fairtune.training.trainer import pretrain


logger = logging.getLogger("fairtune")

MIN_RATIO = 0.05
MAX_RATIO = 0.5


def probe_defaults(dataset_size, seed=0):
    return TrainConfig(
        learning_rate=0.1,
        epochs=5,
        batch_size=min(128, dataset_size),
        seed=seed,
    )


def estimate_bias_ratio(arch, d_r, probe_config=None):
    """Minority fraction estimated from an ERM probe's training error set"""
    if len(d_r) == 0:
        raise PreconditionError("bias estimation needs a non-empty dataset")
    if probe_config is None:
        probe_config = probe_defaults(len(d_r))
    probe, _ = pretrain(arch, d_r, probe_config, Strategy.ERM_REAL)
    errors = error_set(probe, d_r)
    ratio = len(errors) / len(d_r)
    estimate = min(max(ratio, MIN_RATIO), MAX_RATIO)
    logger.info(
        f"error set holds {len(errors)} of {len(d_r)} examples, "\
        f"estimated minority fraction {estimate:.4f}"
    )
    return estimate
