import logging

import numpy as np

from fairtune.data.dataset import cell_counts, is_balanced
from fairtune.errors import ConfigurationError, EmptySelectionError, ShapeError
from fairtune.masks.selection import Provenance, all_mask
from fairtune.net.model import apply_update, init_model, mean_gradient
from fairtune.seeding import derive_seeds
from fairtune.training.config import RunRecord, Strategy


logger = logging.getLogger("fairtune")


def train_epochs(model, dataset, config, mask):
    """Seeded mini-batch SGD; every update goes through the mask"""
    config.validate(len(dataset))
    count = len(dataset)
    rng = np.random.default_rng(config.seed)
    losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(count) if config.shuffle else np.arange(count)
        lr = config.lr_at(epoch)
        total = 0.0
        for start in range(0, count, config.batch_size):
            batch = dataset.take(
                order[start:start + config.batch_size],
                spec_fingerprint=dataset.spec_fingerprint,
            )
            grads = mean_gradient(model, batch)
            total += grads.mean_loss * len(batch)
            ## a zero rate leaves every group untouched
            if lr > 0:
                model = apply_update(model, grads, lr, mask)
        losses.append(total / count)
        logger.debug(
            f"epoch {epoch + 1}/{config.epochs} lr={lr:g} loss={losses[-1]:.6f}"
        )
    return model, losses


def pretrain(arch, d_r, config, strategy=Strategy.ERM_REAL):
    init_seed = derive_seeds(config.seed, 1)[0]
    model = init_model(arch, init_seed)
    logger.info(f"pretraining {model} on {d_r} ({strategy.value})")
    model, losses = train_epochs(model, d_r, config, all_mask(arch.num_groups))
    record = RunRecord(
        strategy=strategy,
        per_epoch_loss=losses,
        pretrain_config=config,
    )
    return model, record


def finetune(model, data, mask, config, strategy):
    if len(mask) != len(model.groups):
        raise ShapeError(
            f"mask covers {len(mask)} groups, model has {len(model.groups)}"
        )
    if mask.count == 0:
        if mask.provenance is Provenance.SMG:
            raise EmptySelectionError(mask.k)
        raise ConfigurationError(f"{mask} selects no parameter group")
    logger.debug(f"fine-tuning {model} with {mask} on {data}")
    tuned, losses = train_epochs(model, data, config, mask)
    record = RunRecord(
        strategy=strategy,
        per_epoch_loss=losses,
        finetune_config=config,
        mask=mask,
    )
    return tuned, record


def warn_if_unbalanced(d_s2):
    if not is_balanced(d_s2):
        logger.warning(f"{d_s2} is not balanced: {cell_counts(d_s2)}")


def selective_finetune(model, d_s2, mask, config):
    """Masked SGD on the balanced synthetic set"""
    warn_if_unbalanced(d_s2)
    return finetune(model, d_s2, mask, config, Strategy.SELECTIVE_FINETUNE)


def full_finetune(model, data, config):
    return finetune(
        model, data, all_mask(len(model.groups)), config, Strategy.FULL_FINETUNE
    )
