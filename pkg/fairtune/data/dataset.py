import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from fairtune.errors import PreconditionError, ShapeError
from fairtune.seeding import fingerprint


class Domain(str, Enum):
    REAL = "real"
    SYNTHETIC = "synthetic"


DOMAINS = (Domain.REAL, Domain.SYNTHETIC)

## the four (y, s) strata in canonical order
CELLS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Example:
    features: tuple
    target: int
    protected: int
    domain: Domain


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Column-oriented labeled examples.

    domain holds codes into DOMAINS (0 real, 1 synthetic). Arrays are
    read-only once the dataset is built.
    """
    features: np.ndarray
    target: np.ndarray
    protected: np.ndarray
    domain: np.ndarray
    spec_fingerprint: str

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        if features.ndim == 1 and features.size == 0:
            features = features.reshape(0, 0)
        if features.ndim != 2:
            raise ShapeError(f"features must be 2-d, got {features.shape}")
        count = features.shape[0]
        columns = {}
        for name in ("target", "protected", "domain"):
            column = np.array(getattr(self, name), dtype=np.int64).reshape(-1)
            if column.shape[0] != count:
                raise ShapeError(
                    f"{name} has {column.shape[0]} entries, "\
                    f"features have {count} rows"
                )
            if not np.all((column == 0) | (column == 1)):
                raise PreconditionError(f"{name} values must be 0 or 1")
            columns[name] = column
        if not np.all(np.isfinite(features)):
            raise PreconditionError("features must be finite")
        for array in (features, *columns.values()):
            array.setflags(write=False)
        object.__setattr__(self, "features", features)
        for name, column in columns.items():
            object.__setattr__(self, name, column)

    def __len__(self):
        return self.features.shape[0]

    def __getitem__(self, index):
        return Example(
            features=tuple(float(v) for v in self.features[index]),
            target=int(self.target[index]),
            protected=int(self.protected[index]),
            domain=DOMAINS[self.domain[index]],
        )

    def __iter__(self):
        for index in range(len(self)):
            yield self[index]

    def __str__(self):
        return (
            f"<Dataset n={len(self)} d={self.feature_dim} "\
            f"{self.spec_fingerprint[:10]}>"
        )

    @property
    def feature_dim(self):
        return self.features.shape[1]

    @classmethod
    def from_examples(cls, examples, spec_fingerprint):
        examples = list(examples)
        return cls(
            features=np.array([e.features for e in examples], dtype=np.float64),
            target=[e.target for e in examples],
            protected=[e.protected for e in examples],
            domain=[DOMAINS.index(Domain(e.domain)) for e in examples],
            spec_fingerprint=spec_fingerprint,
        )

    def take(self, indices, spec_fingerprint=None):
        indices = np.asarray(indices, dtype=np.int64)
        if spec_fingerprint is None:
            spec_fingerprint = fingerprint({
                "parent": self.spec_fingerprint,
                "indices": indices.tolist(),
            })
        return Dataset(
            features=self.features[indices].reshape(len(indices), self.feature_dim),
            target=self.target[indices],
            protected=self.protected[indices],
            domain=self.domain[indices],
            spec_fingerprint=spec_fingerprint,
        )

    def cell_indices(self, cell):
        y, s = cell
        return np.flatnonzero((self.target == y) & (self.protected == s))


def concat_datasets(*datasets):
    if not datasets:
        raise PreconditionError("nothing to concatenate")
    dims = {d.feature_dim for d in datasets}
    if len(dims) != 1:
        raise ShapeError(f"feature lengths differ: {sorted(dims)}")
    return Dataset(
        features=np.concatenate([d.features for d in datasets]),
        target=np.concatenate([d.target for d in datasets]),
        protected=np.concatenate([d.protected for d in datasets]),
        domain=np.concatenate([d.domain for d in datasets]),
        spec_fingerprint=fingerprint(
            {"concat": [d.spec_fingerprint for d in datasets]}
        ),
    )


def cell_counts(dataset):
    return {cell: int(len(dataset.cell_indices(cell))) for cell in CELLS}


def is_balanced(dataset):
    return len(set(cell_counts(dataset).values())) == 1


def stratified_indices(dataset, fraction, seed):
    """Per-cell uniform draw of round(fraction * cell size) indices, sorted"""
    rng = np.random.default_rng(seed)
    chosen = []
    for cell in CELLS:
        members = dataset.cell_indices(cell)
        if len(members) == 0:
            continue
        size = max(1, math.floor(fraction * len(members) + 0.5))
        size = min(size, len(members))
        chosen.append(rng.choice(members, size=size, replace=False))
    if not chosen:
        return np.array([], dtype=np.int64)
    return np.sort(np.concatenate(chosen))


def balanced_split(dataset, fraction, seed):
    """(train, validation) with validation drawn per (y, s) cell"""
    if not 0 < fraction < 1:
        raise PreconditionError(f"split fraction must be in (0, 1), got {fraction}")
    held_out = stratified_indices(dataset, fraction, seed)
    keep = np.setdiff1d(np.arange(len(dataset)), held_out)
    return dataset.take(keep), dataset.take(held_out)


def subsample_real(dataset, fraction, seed):
    """Keep a stratified fraction of a real training set"""
    if not 0 < fraction <= 1:
        raise PreconditionError(f"real fraction must be in (0, 1], got {fraction}")
    if fraction == 1:
        return dataset
    return dataset.take(stratified_indices(dataset, fraction, seed))
