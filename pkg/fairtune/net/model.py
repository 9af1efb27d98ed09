import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from fairtune.errors import (
    ConfigurationError,
    FairtuneError,
    PreconditionError,
    ShapeError,
)
from fairtune.net.arch import ModelArch


logger = logging.getLogger("fairtune")


class GroupRole(str, Enum):
    WEIGHT = "weight"
    BIAS = "bias"


class DatasetTag(str, Enum):
    REAL_BIASED = "real_biased"
    SYNTHETIC_BIASED = "synthetic_biased"
    SYNTHETIC_BALANCED = "synthetic_balanced"
    OTHER = "other"


@dataclass(frozen=True, eq=False)
class ParameterGroup:
    group_id: int
    layer_index: int
    role: GroupRole
    block_id: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __str__(self):
        return (
            f"<group {self.group_id} layer {self.layer_index} "\
            f"{self.role.value} {self.values.shape}>"
        )

    def with_values(self, values):
        return ParameterGroup(
            group_id=self.group_id,
            layer_index=self.layer_index,
            role=self.role,
            block_id=self.block_id,
            values=values,
        )


@dataclass(frozen=True, eq=False)
class Model:
    arch: ModelArch
    groups: tuple
    seed: int

    def __post_init__(self):
        groups = tuple(self.groups)
        object.__setattr__(self, "groups", groups)
        if len(groups) != self.arch.num_groups:
            raise ShapeError(
                f"model has {len(groups)} groups, "\
                f"architecture needs {self.arch.num_groups}"
            )
        for group in groups:
            expected = self.arch.layer_shape(group.layer_index)
            if group.role is GroupRole.BIAS:
                expected = expected[:1]
            if group.values.shape != expected:
                raise ShapeError(
                    f"{group} does not match architecture shape {expected}"
                )

    def __str__(self):
        widths = "-".join(str(w) for w in self.arch.widths)
        return f"<Model {widths} seed={self.seed}>"

    @classmethod
    def from_arrays(cls, arch, arrays, seed=0):
        """Build a model from [W0, b0, W1, b1, ...] in group order"""
        groups = []
        for group_id, values in enumerate(arrays):
            layer = group_id // 2
            groups.append(ParameterGroup(
                group_id=group_id,
                layer_index=layer,
                role=GroupRole.WEIGHT if group_id % 2 == 0 else GroupRole.BIAS,
                block_id=arch.block_assignment[layer],
                values=values,
            ))
        return cls(arch=arch, groups=tuple(groups), seed=seed)

    def layer(self, index):
        return (
            self.groups[2 * index].values,
            self.groups[2 * index + 1].values,
        )

    def with_groups(self, groups):
        return Model(arch=self.arch, groups=tuple(groups), seed=self.seed)

    def num_parameters(self):
        return sum(group.values.size for group in self.groups)


@dataclass(frozen=True, eq=False)
class GradientSnapshot:
    per_group: tuple
    dataset_tag: DatasetTag
    mean_loss: float
    num_examples: int

    def __post_init__(self):
        object.__setattr__(self, "per_group", tuple(self.per_group))
        if self.num_examples < 1:
            raise PreconditionError("a gradient snapshot needs examples")
        for group_id, grad in enumerate(self.per_group):
            if not np.all(np.isfinite(grad)):
                raise FairtuneError(
                    f"non-finite gradient in group {group_id} "\
                    f"({self.dataset_tag.value})"
                )

    def matches(self, model):
        return len(self.per_group) == len(model.groups) and all(
            grad.shape == group.values.shape
            for grad, group in zip(self.per_group, model.groups)
        )


def init_model(arch, seed):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases"""
    arch.validate()
    rng = np.random.default_rng(seed)
    arrays = []
    for layer in range(arch.num_layers):
        out_dim, fan_in = arch.layer_shape(layer)
        bound = 1.0 / np.sqrt(fan_in)
        arrays.append(rng.uniform(-bound, bound, size=(out_dim, fan_in)))
        arrays.append(np.zeros(out_dim))
    model = Model.from_arrays(arch, arrays, seed=seed)
    logger.debug(
        f"initialized {model} with {model.num_parameters()} parameters"
    )
    return model


def _features(model, dataset):
    features = np.asarray(dataset.features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.arch.input_dim:
        raise ShapeError(
            f"features of shape {features.shape} do not fit "\
            f"input_dim {model.arch.input_dim}"
        )
    return features


def _forward(model, features):
    ## pre-activations per layer, inputs per layer (last entry = logits)
    pre_activations = []
    inputs = [features]
    hidden = features
    last = model.arch.num_layers - 1
    for index in range(model.arch.num_layers):
        weights, bias = model.layer(index)
        z = hidden @ weights.T + bias
        pre_activations.append(z)
        hidden = z if index == last else np.maximum(z, 0.0)
        inputs.append(hidden)
    return pre_activations, inputs


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    total = exp.sum(axis=1, keepdims=True)
    return exp / total, shifted - np.log(total)


def forward_loss(model, dataset):
    """Softmax probabilities and mean negative log-likelihood"""
    features = _features(model, dataset)
    _, inputs = _forward(model, features)
    probabilities, log_probabilities = _softmax(inputs[-1])
    targets = np.asarray(dataset.target)
    if len(targets) == 0:
        return probabilities, float("nan")
    loss = -log_probabilities[np.arange(len(targets)), targets].mean()
    return probabilities, float(loss)


def logits(model, dataset):
    _, inputs = _forward(model, _features(model, dataset))
    return inputs[-1]


def predict(model, dataset):
    """Argmax labels; exactly equal logits resolve to 0"""
    scores = logits(model, dataset)
    return (scores[:, 1] > scores[:, 0]).astype(np.int64)


def accuracy(model, dataset):
    return float(np.mean(predict(model, dataset) == np.asarray(dataset.target)))


def _mean_over_examples(per_example):
    ## reduction runs over axis 0 in ascending example order
    return np.add.reduce(per_example, axis=0) / per_example.shape[0]


def mean_gradient(model, dataset, tag=DatasetTag.OTHER):
    """Exact mean cross-entropy gradient over every example"""
    count = len(dataset)
    if count == 0:
        raise PreconditionError("mean_gradient needs a non-empty dataset")
    features = _features(model, dataset)
    targets = np.asarray(dataset.target)
    pre_activations, inputs = _forward(model, features)
    probabilities, log_probabilities = _softmax(inputs[-1])
    rows = np.arange(count)
    loss = float(-log_probabilities[rows, targets].mean())

    delta = probabilities.copy()
    delta[rows, targets] -= 1.0
    grads = [None] * model.arch.num_groups
    for index in reversed(range(model.arch.num_layers)):
        grads[2 * index] = _mean_over_examples(
            np.einsum("ni,nj->nij", delta, inputs[index])
        )
        grads[2 * index + 1] = _mean_over_examples(delta)
        if index > 0:
            weights, _ = model.layer(index)
            delta = (delta @ weights) * (pre_activations[index - 1] > 0.0)

    return GradientSnapshot(
        per_group=tuple(grads),
        dataset_tag=DatasetTag(tag),
        mean_loss=loss,
        num_examples=count,
    )


def apply_update(model, grads, lr, mask):
    """theta_j <- theta_j - lr * g_j for every selected group"""
    selected = tuple(bool(flag) for flag in mask.selected)
    if len(selected) != len(model.groups):
        raise ShapeError(
            f"mask covers {len(selected)} groups, "\
            f"model has {len(model.groups)}"
        )
    if not grads.matches(model):
        raise ShapeError("gradient snapshot does not match the model")
    if not lr > 0:
        raise ConfigurationError(f"learning rate must be positive, got {lr}")
    groups = []
    for group, grad, chosen in zip(model.groups, grads.per_group, selected):
        if chosen:
            groups.append(group.with_values(group.values - lr * grad))
        else:
            groups.append(group)
    return model.with_groups(groups)
