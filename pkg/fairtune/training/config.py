import dataclasses
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from fairtune.errors import ConfigurationError, FairtuneError
from fairtune.masks.serialize import mask_to_dict


class Strategy(str, Enum):
    ERM_REAL = "erm_real"
    SYNTHETIC_ONLY = "synthetic_only"
    SUPPLEMENTATION = "supplementation"
    REPAIRING = "repairing"
    LINEAR_PROBE = "linear_probe"
    FULL_FINETUNE = "full_finetune"
    RANDOM_FINETUNE = "random_finetune"
    BLOCK_UPDATE = "block_update"
    BLOCK_FREEZE = "block_freeze"
    SELECTIVE_FINETUNE = "selective_finetune"

    @property
    def needs_mask(self):
        return self in FINETUNE_STRATEGIES


FINETUNE_STRATEGIES = frozenset({
    Strategy.LINEAR_PROBE,
    Strategy.FULL_FINETUNE,
    Strategy.RANDOM_FINETUNE,
    Strategy.BLOCK_UPDATE,
    Strategy.BLOCK_FREEZE,
    Strategy.SELECTIVE_FINETUNE,
})


@dataclass(frozen=True)
class TrainConfig:
    """
    Plain mini-batch SGD settings.

    lr_schedule holds (epoch, multiplier) pairs; from a listed epoch
    (0-based) on, the learning rate is learning_rate * multiplier of the
    latest entry reached.
    """
    learning_rate: float
    epochs: int
    batch_size: int
    lr_schedule: tuple = ()
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        object.__setattr__(
            self,
            "lr_schedule",
            tuple(sorted((int(e), float(m)) for e, m in self.lr_schedule)),
        )

    @classmethod
    def pretrain_defaults(cls, seed=0):
        return cls(
            learning_rate=0.01,
            epochs=15,
            batch_size=128,
            lr_schedule=((10, 0.01),),
            seed=seed,
        )

    @classmethod
    def finetune_defaults(cls, seed=0):
        return cls(learning_rate=0.5, epochs=10, batch_size=128, seed=seed)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def validate(self, dataset_size=None):
        if not self.learning_rate > 0:
            raise ConfigurationError(
                f"learning_rate must be positive, got {self.learning_rate}"
            )
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ConfigurationError(f"epochs must be a positive integer, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be positive, got {self.batch_size}")
        for epoch, multiplier in self.lr_schedule:
            if not 0 <= epoch < self.epochs:
                raise ConfigurationError(
                    f"schedule epoch {epoch} outside 0..{self.epochs - 1}"
                )
            if multiplier < 0:
                raise ConfigurationError(f"schedule multiplier {multiplier} is negative")
        if dataset_size is not None and self.batch_size > dataset_size:
            raise ConfigurationError(
                f"batch_size {self.batch_size} exceeds dataset size {dataset_size}"
            )
        return self

    def lr_at(self, epoch):
        multiplier = 1.0
        for start, value in self.lr_schedule:
            if epoch >= start:
                multiplier = value
        return self.learning_rate * multiplier

    def to_dict(self):
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr_schedule": [list(entry) for entry in self.lr_schedule],
            "seed": self.seed,
            "shuffle": self.shuffle,
        }


def scaled_batch_size(batch_size, dataset_size):
    """min(batch_size, N / 10), at least one example"""
    return max(1, min(batch_size, dataset_size // 10))


@dataclass
class RunRecord:
    strategy: Strategy
    per_epoch_loss: list
    pretrain_config: TrainConfig = None
    finetune_config: TrainConfig = None
    mask: object = None
    pretrain_loss: list = field(default_factory=list)
    final_model_ref: str = None
    report: object = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "strategy": self.strategy.value,
            "pretrain_config": (
                self.pretrain_config.to_dict() if self.pretrain_config else None
            ),
            "finetune_config": (
                self.finetune_config.to_dict() if self.finetune_config else None
            ),
            "mask": mask_to_dict(self.mask) if self.mask is not None else None,
            "per_epoch_loss": [float(v) for v in self.per_epoch_loss],
            "pretrain_loss": [float(v) for v in self.pretrain_loss],
            "final_model_ref": self.final_model_ref,
            "report": self.report.to_record() if self.report is not None else None,
            "details": self.details,
        }


def save_record(record, path):
    path = Path(path)
    try:
        path.write_text(
            json.dumps(record.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    except OSError as err:
        raise FairtuneError(f"cannot write run record to {path}: {err}") from err
    return path
