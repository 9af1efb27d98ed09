import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from fairtune.errors import ConfigurationError
from fairtune.masks.scores import Criterion, rank_scores, sensitivity_scores


logger = logging.getLogger("fairtune")


class Provenance(str, Enum):
    SMG = "smg"
    RANDOM = "random"
    BLOCK_UPDATE = "block_update"
    BLOCK_FREEZE = "block_freeze"
    LINEAR_PROBE = "linear_probe"
    ALL = "all"
    NONE = "none"


@dataclass(frozen=True)
class SelectionMask:
    selected: tuple
    provenance: Provenance
    k: int = None

    def __post_init__(self):
        object.__setattr__(self, "selected", tuple(bool(v) for v in self.selected))
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    def __len__(self):
        return len(self.selected)

    def __str__(self):
        bits = "".join("1" if flag else "0" for flag in self.selected)
        suffix = f" k={self.k}" if self.k is not None else ""
        return f"<SelectionMask {self.provenance.value} {bits}{suffix}>"

    @property
    def count(self):
        return sum(self.selected)

    @property
    def indices(self):
        return tuple(i for i, flag in enumerate(self.selected) if flag)


def all_mask(num_groups):
    return SelectionMask(selected=(True,) * num_groups, provenance=Provenance.ALL)


def none_mask(num_groups):
    return SelectionMask(selected=(False,) * num_groups, provenance=Provenance.NONE)


def round_half_up(value):
    return int(math.floor(value + 0.5))


def k_from_fraction(num_groups, fraction):
    if not 0 < fraction <= 1:
        raise ConfigurationError(f"k fraction must be in (0, 1], got {fraction}")
    return max(1, round_half_up(fraction * num_groups))


def select_topk_intersection(rankings, k):
    """K = top-k of r1 intersected with top-k of r2; may be empty"""
    num_groups = rankings.num_groups
    if not 1 <= k <= num_groups:
        raise ConfigurationError(f"k must be in [1, {num_groups}], got {k}")
    chosen = set(rankings.r1[:k]) & set(rankings.r2[:k])
    return SelectionMask(
        selected=[group in chosen for group in range(num_groups)],
        provenance=Provenance.SMG,
        k=k,
    )


def smg_mask(g_r, g_s1, g_s2, k, criterion=Criterion.ABSOLUTE_DIFFERENCE):
    scores = sensitivity_scores(g_r, g_s1, g_s2, criterion)
    mask = select_topk_intersection(rank_scores(scores), k)
    logger.debug(f"selective mask {mask} from {scores.criterion.value} scores")
    return mask


def random_mask(num_groups, fraction, seed):
    """round(fraction * G) distinct groups, halves rounded up"""
    if not 0 < fraction <= 1:
        raise ConfigurationError(f"random fraction must be in (0, 1], got {fraction}")
    count = round_half_up(fraction * num_groups)
    rng = np.random.default_rng(seed)
    chosen = set(int(i) for i in rng.choice(num_groups, size=count, replace=False))
    return SelectionMask(
        selected=[group in chosen for group in range(num_groups)],
        provenance=Provenance.RANDOM,
    )


class SelectorKind(str, Enum):
    UPDATE_BLOCK = "update_block"
    FREEZE_BLOCK = "freeze_block"
    LINEAR_PROBE = "linear_probe"


@dataclass(frozen=True)
class StructuralSelector:
    kind: SelectorKind
    block: int = None

    def __str__(self):
        if self.block is None:
            return self.kind.value
        return f"{self.kind.value}({self.block})"


def update_block(block):
    return StructuralSelector(SelectorKind.UPDATE_BLOCK, block)


def freeze_block(block):
    return StructuralSelector(SelectorKind.FREEZE_BLOCK, block)


def linear_probe():
    return StructuralSelector(SelectorKind.LINEAR_PROBE)


def structural_mask(model, selector):
    groups = model.groups
    if selector.kind is SelectorKind.LINEAR_PROBE:
        head = model.arch.num_layers - 1
        return SelectionMask(
            selected=[group.layer_index == head for group in groups],
            provenance=Provenance.LINEAR_PROBE,
        )
    if selector.block not in range(model.arch.num_blocks):
        raise ConfigurationError(
            f"block {selector.block} does not exist, "\
            f"model has {model.arch.num_blocks} blocks"
        )
    if selector.kind is SelectorKind.UPDATE_BLOCK:
        return SelectionMask(
            selected=[group.block_id == selector.block for group in groups],
            provenance=Provenance.BLOCK_UPDATE,
        )
    return SelectionMask(
        selected=[group.block_id != selector.block for group in groups],
        provenance=Provenance.BLOCK_FREEZE,
    )


def selected_parameter_fraction(model, mask):
    total = model.num_parameters()
    chosen = sum(
        group.values.size
        for group, flag in zip(model.groups, mask.selected) if flag
    )
    return chosen / total


def mask_layer_distribution(model, mask):
    """Share of the selected scalars that sits in each layer"""
    per_layer = [0] * model.arch.num_layers
    for group, flag in zip(model.groups, mask.selected):
        if flag:
            per_layer[group.layer_index] += group.values.size
    total = sum(per_layer)
    if total == 0:
        return [0.0] * len(per_layer)
    return [count / total for count in per_layer]
