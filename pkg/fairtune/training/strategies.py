import logging
from dataclasses import dataclass

from fairtune.data.compose import ComposeMode, compose_training_set
from fairtune.data.dataset import balanced_split
from fairtune.errors import ConfigurationError, EmptySelectionError
from fairtune.masks.scores import Criterion
from fairtune.masks.selection import (
    all_mask,
    freeze_block,
    k_from_fraction,
    linear_probe,
    mask_layer_distribution,
    random_mask,
    selected_parameter_fraction,
    smg_mask,
    structural_mask,
    update_block,
)
from fairtune.metrics.fairness import evaluate
from fairtune.net.model import DatasetTag, mean_gradient
from fairtune.training.config import Strategy, TrainConfig, scaled_batch_size
from fairtune.training.trainer import finetune, pretrain, warn_if_unbalanced


logger = logging.getLogger("fairtune")


@dataclass(frozen=True)
class ExperimentData:
    """Datasets one run may draw on; pool feeds the repairing strategy"""
    d_r: object = None
    d_s1: object = None
    d_s2: object = None
    test: object = None
    pool: object = None


@dataclass(frozen=True)
class StrategyConfigs:
    pretrain: TrainConfig
    finetune: TrainConfig
    learning_rates: tuple = (0.4, 0.5, 0.6)
    validation_fraction: float = 0.1
    k: int = None
    k_fraction: float = None
    criterion: Criterion = Criterion.ABSOLUTE_DIFFERENCE
    random_fraction: float = 0.55
    block: int = 0
    mask_seed: int = 0
    split_seed: int = 0

    def resolve_k(self, num_groups):
        if self.k is not None:
            return self.k
        if self.k_fraction is not None:
            return k_from_fraction(num_groups, self.k_fraction)
        raise ConfigurationError("selective fine-tuning needs k or k_fraction")


def _require(data, name, strategy):
    dataset = getattr(data, name)
    if dataset is None or len(dataset) == 0:
        raise ConfigurationError(f"{strategy.value} needs the {name} dataset")
    return dataset


def selection_snapshots(model, d_r, d_s1, d_s2):
    """g_R, g_S1, g_S2, all at the same parameters"""
    return (
        mean_gradient(model, d_r, DatasetTag.REAL_BIASED),
        mean_gradient(model, d_s1, DatasetTag.SYNTHETIC_BIASED),
        mean_gradient(model, d_s2, DatasetTag.SYNTHETIC_BALANCED),
    )


def strategy_mask(strategy, model, data, configs):
    num_groups = len(model.groups)
    if strategy is Strategy.FULL_FINETUNE:
        return all_mask(num_groups)
    if strategy is Strategy.LINEAR_PROBE:
        return structural_mask(model, linear_probe())
    if strategy is Strategy.BLOCK_UPDATE:
        return structural_mask(model, update_block(configs.block))
    if strategy is Strategy.BLOCK_FREEZE:
        return structural_mask(model, freeze_block(configs.block))
    if strategy is Strategy.RANDOM_FINETUNE:
        return random_mask(num_groups, configs.random_fraction, configs.mask_seed)
    k = configs.resolve_k(num_groups)
    g_r, g_s1, g_s2 = selection_snapshots(
        model,
        _require(data, "d_r", strategy),
        _require(data, "d_s1", strategy),
        _require(data, "d_s2", strategy),
    )
    mask = smg_mask(g_r, g_s1, g_s2, k, configs.criterion)
    if mask.count == 0:
        raise EmptySelectionError(k)
    return mask


def search_learning_rate(model, d_s2, mask, configs, strategy):
    """
    Fine-tune once per grid rate on a balanced split of D_S2 and keep the
    run with the lowest validation EO (first rate wins ties).
    """
    rates = tuple(configs.learning_rates)
    if not rates:
        raise ConfigurationError("the learning-rate grid is empty")
    if len(rates) == 1:
        train, validation = d_s2, None
    else:
        train, validation = balanced_split(
            d_s2, configs.validation_fraction, configs.split_seed
        )
    base = configs.finetune.replace(
        batch_size=scaled_batch_size(configs.finetune.batch_size, len(train))
    )
    best = None
    trials = []
    for rate in rates:
        tuned, record = finetune(
            model, train, mask, base.replace(learning_rate=rate), strategy
        )
        if validation is None:
            best = (None, tuned, record, rate)
            break
        score = evaluate(tuned, validation).eo
        trials.append({"learning_rate": rate, "validation_eo": score})
        logger.debug(f"{strategy.value} lr={rate} validation EO {score:.4f}")
        if best is None or score < best[0]:
            best = (score, tuned, record, rate)
    _, tuned, record, rate = best
    record.details["learning_rate"] = rate
    record.details["lr_search"] = trials
    logger.info(f"{strategy.value} selected learning rate {rate}")
    return tuned, record


def run_strategy(strategy, data, arch, configs):
    """Train one strategy end to end and score it on the balanced test set"""
    strategy = Strategy(strategy)
    test = _require(data, "test", strategy)

    if strategy is Strategy.ERM_REAL:
        model, record = pretrain(arch, _require(data, "d_r", strategy), configs.pretrain, strategy)
    elif strategy is Strategy.SYNTHETIC_ONLY:
        model, record = pretrain(arch, _require(data, "d_s2", strategy), configs.pretrain, strategy)
    elif strategy in (Strategy.SUPPLEMENTATION, Strategy.REPAIRING):
        d_r = _require(data, "d_r", strategy)
        if strategy is Strategy.SUPPLEMENTATION:
            pool = _require(data, "d_s2", strategy)
        else:
            pool = data.pool if data.pool is not None else _require(data, "d_s2", strategy)
        combined = compose_training_set(ComposeMode(strategy.value), d_r, pool)
        model, record = pretrain(arch, combined, configs.pretrain, strategy)
        record.details["training_size"] = len(combined)
    else:
        base, base_record = pretrain(
            arch, _require(data, "d_r", strategy), configs.pretrain, strategy
        )
        mask = strategy_mask(strategy, base, data, configs)
        d_s2 = _require(data, "d_s2", strategy)
        if strategy is Strategy.SELECTIVE_FINETUNE:
            warn_if_unbalanced(d_s2)
        model, record = search_learning_rate(base, d_s2, mask, configs, strategy)
        record.pretrain_config = configs.pretrain
        record.pretrain_loss = base_record.per_epoch_loss
        record.details["parameter_fraction"] = selected_parameter_fraction(base, mask)
        record.details["layer_distribution"] = mask_layer_distribution(base, mask)

    report = evaluate(model, test)
    record.report = report
    logger.info(
        f"{strategy.value}: acc={report.acc:.4f} wst={report.wst:.4f} "\
        f"eo={report.eo:.4f} std={report.std:.4f}"
    )
    return model, record, report
