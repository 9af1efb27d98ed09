import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from fairtune import __version__
from fairtune.actors.custom.routers import ROUTERS
from fairtune.data.simulator import DomainSpec, default_real_spec
from fairtune.errors import ConfigurationError
from fairtune.masks.scores import Criterion
from fairtune.net.arch import ModelArch
from fairtune.seeding import fingerprint
from fairtune.training.config import Strategy, TrainConfig


OUTPUT_ENV = "FAIRTUNE_OUTPUT_DIR"

JTT = "jtt"

SWEEP_AXES = (
    "topk", "bias_ratio", "syn_amount", "real_amount", "random_ratio", "layer_freeze"
)

DEFAULT_SWEEPS = {
    "topk": (2, 3, 4, 5, 6),
    "bias_ratio": (0.6, 0.7, 0.8, 0.9),
    "syn_amount": (0.5, 1.0, 1.5, 2.0),
    "real_amount": (1.0, 0.5, 0.25, 0.1),
    "random_ratio": (0.4, 0.55, 0.7, 0.85),
}

DEFAULT_STRATEGIES = tuple(Strategy)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything one experiment grid needs. output_dir, workers, routing
    and run_timeout steer execution only and stay out of the config hash.
    """
    arch: ModelArch = field(default_factory=ModelArch.default)
    real_spec: DomainSpec = field(default_factory=default_real_spec)
    shift_magnitude: float = 0.8
    s1_bias_ratio: object = None
    syn_ratio: float = 1.0
    real_fraction: float = 1.0
    pool_per_cell: int = None
    test_per_cell: int = 500
    data_seed: int = 0
    pretrain: TrainConfig = field(default_factory=TrainConfig.pretrain_defaults)
    finetune: TrainConfig = field(default_factory=TrainConfig.finetune_defaults)
    learning_rates: tuple = (0.4, 0.5, 0.6)
    validation_fraction: float = 0.1
    k: int = 4
    k_fraction: float = None
    criterion: Criterion = Criterion.ABSOLUTE_DIFFERENCE
    random_fraction: float = 0.55
    block: int = 0
    strategies: tuple = DEFAULT_STRATEGIES
    seeds: tuple = tuple(range(8))
    sweeps: dict = field(default_factory=lambda: dict(DEFAULT_SWEEPS))
    output_dir: Path = Path("results")
    workers: int = 1
    routing: str = "shortest_queue"
    run_timeout: float = None

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def resolved_s1_bias(self):
        """Numeric D_S1 bias; None mirrors the real bias"""
        if self.s1_bias_ratio is None:
            return self.real_spec.bias_ratio
        return self.s1_bias_ratio

    def validate(self):
        self.arch.validate()
        self.real_spec.validate()
        if self.arch.input_dim != self.real_spec.feature_dim:
            raise ConfigurationError(
                f"model input_dim {self.arch.input_dim} differs from "\
                f"feature dimension {self.real_spec.feature_dim}"
            )
        self.pretrain.validate()
        self.finetune.validate()
        bias = self.s1_bias_ratio
        if bias is not None and bias != JTT and not 0.5 <= bias <= 1.0:
            raise ConfigurationError(f"s1_bias_ratio must be in [0.5, 1.0] or '{JTT}'")
        if not self.syn_ratio > 0:
            raise ConfigurationError(f"syn_ratio must be positive, got {self.syn_ratio}")
        if not 0 < self.real_fraction <= 1:
            raise ConfigurationError(f"real_fraction must be in (0, 1], got {self.real_fraction}")
        if not self.learning_rates or min(self.learning_rates) <= 0:
            raise ConfigurationError("learning_rates must be positive and non-empty")
        if self.k is not None and not 1 <= self.k <= self.arch.num_groups:
            raise ConfigurationError(f"k must be in [1, {self.arch.num_groups}], got {self.k}")
        if not self.seeds:
            raise ConfigurationError("the seed list is empty")
        if not self.strategies:
            raise ConfigurationError("the strategy list is empty")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be positive, got {self.workers}")
        if self.routing not in ROUTERS:
            raise ConfigurationError(
                f"unknown routing '{self.routing}', expected one of {sorted(ROUTERS)}"
            )
        if self.run_timeout is not None and not self.run_timeout > 0:
            raise ConfigurationError(f"run_timeout must be positive, got {self.run_timeout}")
        if not 0 < self.validation_fraction < 1:
            raise ConfigurationError(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )
        if not 0 < self.random_fraction <= 1:
            raise ConfigurationError(
                f"random_fraction must be in (0, 1], got {self.random_fraction}"
            )
        if self.block not in range(self.arch.num_blocks):
            raise ConfigurationError(f"block {self.block} does not exist")
        return self

    def to_dict(self):
        return {
            "arch": self.arch.to_dict(),
            "real_spec": self.real_spec.to_dict(),
            "shift_magnitude": self.shift_magnitude,
            "s1_bias_ratio": self.s1_bias_ratio,
            "syn_ratio": self.syn_ratio,
            "real_fraction": self.real_fraction,
            "pool_per_cell": self.pool_per_cell,
            "test_per_cell": self.test_per_cell,
            "data_seed": self.data_seed,
            "pretrain": self.pretrain.to_dict(),
            "finetune": self.finetune.to_dict(),
            "learning_rates": list(self.learning_rates),
            "validation_fraction": self.validation_fraction,
            "k": self.k,
            "k_fraction": self.k_fraction,
            "criterion": self.criterion.value,
            "random_fraction": self.random_fraction,
            "block": self.block,
            "strategies": [s.value for s in self.strategies],
            "seeds": list(self.seeds),
            "sweeps": {axis: list(values) for axis, values in sorted(self.sweeps.items())},
            "version": __version__,
        }

    def config_hash(self):
        return fingerprint(self.to_dict())


def _list(text, cast):
    return tuple(cast(item.strip()) for item in text.split(",") if item.strip())


def _schedule(text):
    entries = []
    for item in _list(text, str):
        epoch, _, multiplier = item.partition(":")
        entries.append((int(epoch), float(multiplier)))
    return tuple(entries)


def _optional(text, cast):
    return None if text.strip().lower() in ("", "none") else cast(text)


def _bias(text):
    text = text.strip().lower()
    if text in ("", "none", "mirror"):
        return None
    if text == JTT:
        return JTT
    return float(text)


## section -> key -> parser
SCHEMA = {
    "model": {
        "input_dim": int,
        "hidden_widths": lambda t: _list(t, int),
        "blocks": lambda t: _list(t, int),
    },
    "data": {
        "n_per_target": int,
        "bias_ratio": float,
        "signal_magnitude": float,
        "spurious_magnitude": float,
        "shift_magnitude": float,
        "noise_sigma": float,
        "s1_bias_ratio": _bias,
        "syn_ratio": float,
        "real_fraction": float,
        "pool_per_cell": lambda t: _optional(t, int),
        "test_per_cell": int,
        "data_seed": int,
    },
    "pretrain": {
        "learning_rate": float,
        "epochs": int,
        "batch_size": int,
        "lr_schedule": _schedule,
        "shuffle": lambda t: t.strip().lower() in ("1", "true", "yes", "on"),
    },
    "finetune": {
        "learning_rates": lambda t: _list(t, float),
        "epochs": int,
        "batch_size": int,
        "lr_schedule": _schedule,
        "validation_fraction": float,
        "shuffle": lambda t: t.strip().lower() in ("1", "true", "yes", "on"),
    },
    "selection": {
        "k": lambda t: _optional(t, int),
        "k_fraction": lambda t: _optional(t, float),
        "criterion": Criterion,
        "random_fraction": float,
        "block": int,
    },
    "experiment": {
        "strategies": lambda t: _list(t, Strategy),
        "seeds": lambda t: _list(t, int),
        "output_dir": Path,
        "workers": int,
        "routing": str,
        "run_timeout": lambda t: _optional(t, float),
    },
    "sweep": {
        "topk": lambda t: _list(t, int),
        "bias_ratio": lambda t: _list(t, float),
        "syn_amount": lambda t: _list(t, float),
        "real_amount": lambda t: _list(t, float),
        "random_ratio": lambda t: _list(t, float),
    },
}


def _parse(parser):
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key, text in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown key '{key}' in [{section}]")
            try:
                values[(section, key)] = SCHEMA[section][key](text)
            except ValueError as err:
                raise ConfigurationError(
                    f"bad value '{text}' for [{section}] {key}: {err}"
                ) from err
    return values


def _build(values):
    get = lambda section, key, default=None: values.get((section, key), default)
    arch = ModelArch(
        input_dim=get("model", "input_dim", 20),
        hidden_widths=get("model", "hidden_widths", (32, 16)),
        block_assignment=get("model", "blocks"),
    )
    real_spec = default_real_spec(
        n_per_target=get("data", "n_per_target", 2000),
        bias_ratio=get("data", "bias_ratio", 0.9),
        feature_dim=arch.input_dim,
        signal_magnitude=get("data", "signal_magnitude", 1.0),
        spurious_magnitude=get("data", "spurious_magnitude", 1.2),
        noise_sigma=get("data", "noise_sigma", 1.0),
    )
    pretrain = TrainConfig.pretrain_defaults()
    pretrain = pretrain.replace(
        learning_rate=get("pretrain", "learning_rate", pretrain.learning_rate),
        epochs=get("pretrain", "epochs", pretrain.epochs),
        batch_size=get("pretrain", "batch_size", pretrain.batch_size),
        lr_schedule=get("pretrain", "lr_schedule", tuple(
            (epoch, multiplier) for epoch, multiplier in pretrain.lr_schedule
            if epoch < get("pretrain", "epochs", pretrain.epochs)
        )),
        shuffle=get("pretrain", "shuffle", True),
    )
    finetune = TrainConfig.finetune_defaults()
    finetune = finetune.replace(
        epochs=get("finetune", "epochs", finetune.epochs),
        batch_size=get("finetune", "batch_size", finetune.batch_size),
        lr_schedule=get("finetune", "lr_schedule", ()),
        shuffle=get("finetune", "shuffle", True),
    )
    sweeps = dict(DEFAULT_SWEEPS)
    for axis in DEFAULT_SWEEPS:
        if ("sweep", axis) in values:
            sweeps[axis] = values[("sweep", axis)]
    defaults = ExperimentConfig()
    k = get("selection", "k")
    k_fraction = get("selection", "k_fraction")
    if k is None and k_fraction is None:
        ## 2k > G keeps the two top-k sets overlapping
        k = arch.num_groups // 2 + 1
    return ExperimentConfig(
        arch=arch,
        real_spec=real_spec,
        shift_magnitude=get("data", "shift_magnitude", defaults.shift_magnitude),
        s1_bias_ratio=get("data", "s1_bias_ratio"),
        syn_ratio=get("data", "syn_ratio", defaults.syn_ratio),
        real_fraction=get("data", "real_fraction", defaults.real_fraction),
        pool_per_cell=get("data", "pool_per_cell"),
        test_per_cell=get("data", "test_per_cell", defaults.test_per_cell),
        data_seed=get("data", "data_seed", defaults.data_seed),
        pretrain=pretrain,
        finetune=finetune,
        learning_rates=get("finetune", "learning_rates", defaults.learning_rates),
        validation_fraction=get(
            "finetune", "validation_fraction", defaults.validation_fraction
        ),
        k=k,
        k_fraction=k_fraction,
        criterion=get("selection", "criterion", defaults.criterion),
        random_fraction=get("selection", "random_fraction", defaults.random_fraction),
        block=get("selection", "block", defaults.block),
        strategies=get("experiment", "strategies", defaults.strategies),
        seeds=get("experiment", "seeds", defaults.seeds),
        sweeps=sweeps,
        output_dir=get("experiment", "output_dir", defaults.output_dir),
        workers=get("experiment", "workers", defaults.workers),
        routing=get("experiment", "routing", defaults.routing),
        run_timeout=get("experiment", "run_timeout"),
    )


def parse_config(text):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigurationError(f"malformed config: {err}") from err
    config = _build(_parse(parser))
    override = os.environ.get(OUTPUT_ENV)
    if override:
        config = config.replace(output_dir=Path(override))
    return config.validate()


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigurationError(f"cannot read config {path}: {err}") from err
    return parse_config(text)


def default_config():
    """Built-in defaults, honouring the output directory override"""
    config = ExperimentConfig()
    override = os.environ.get(OUTPUT_ENV)
    if override:
        config = config.replace(output_dir=Path(override))
    return config.validate()
