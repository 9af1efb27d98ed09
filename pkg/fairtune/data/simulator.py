import dataclasses
import logging
from dataclasses import dataclass

import numpy as np

from fairtune.data.dataset import CELLS, DOMAINS, Dataset, Domain
from fairtune.errors import ConfigurationError, PreconditionError
from fairtune.seeding import derive_seeds, fingerprint


logger = logging.getLogger("fairtune")

NUM_GROUPS = len(CELLS)

SIGNAL_DIMS = range(0, 5)
SPURIOUS_DIMS = range(5, 10)
SHIFT_START = 10


@dataclass(frozen=True)
class DomainSpec:
    """
    Additive generator: x = y*signal + s*spurious + shift + N(0, sigma^2 I).

    bias_ratio is P(s == y); 0.5 is balanced.
    """
    domain: Domain
    n_per_target: int
    bias_ratio: float
    signal_mean: tuple
    spurious_mean: tuple
    domain_shift: tuple
    noise_sigma: float

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        for name in ("signal_mean", "spurious_mean", "domain_shift"):
            object.__setattr__(
                self, name, tuple(float(v) for v in getattr(self, name))
            )

    @property
    def feature_dim(self):
        return len(self.signal_mean)

    @property
    def num_examples(self):
        return 2 * self.n_per_target

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def validate(self):
        if self.n_per_target < 1:
            raise ConfigurationError(
                f"n_per_target must be positive, got {self.n_per_target}"
            )
        if not 0.5 <= self.bias_ratio <= 1.0:
            raise ConfigurationError(
                f"bias_ratio must be in [0.5, 1.0], got {self.bias_ratio}"
            )
        if not self.noise_sigma > 0:
            raise ConfigurationError(
                f"noise_sigma must be positive, got {self.noise_sigma}"
            )
        vectors = {
            "signal_mean": np.array(self.signal_mean),
            "spurious_mean": np.array(self.spurious_mean),
            "domain_shift": np.array(self.domain_shift),
        }
        if len({v.shape for v in vectors.values()}) != 1:
            raise ConfigurationError(
                "signal, spurious and shift vectors must share one length"
            )
        if not all(np.all(np.isfinite(v)) for v in vectors.values()):
            raise ConfigurationError("generator vectors must be finite")
        names = list(vectors)
        for i, first in enumerate(names):
            for second in names[i + 1:]:
                if np.any((vectors[first] != 0) & (vectors[second] != 0)):
                    raise ConfigurationError(
                        f"{first} and {second} supports overlap"
                    )
        return self

    def to_dict(self):
        return {
            "domain": self.domain.value,
            "n_per_target": self.n_per_target,
            "bias_ratio": self.bias_ratio,
            "signal_mean": list(self.signal_mean),
            "spurious_mean": list(self.spurious_mean),
            "domain_shift": list(self.domain_shift),
            "noise_sigma": self.noise_sigma,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def _on_dims(feature_dim, dims, magnitude):
    vector = np.zeros(feature_dim)
    vector[[d for d in dims if d < feature_dim]] = magnitude
    return tuple(vector)


def default_real_spec(
    n_per_target=2000,
    bias_ratio=0.9,
    feature_dim=20,
    signal_magnitude=1.0,
    spurious_magnitude=1.2,
    noise_sigma=1.0,
):
    if feature_dim <= SHIFT_START:
        raise ConfigurationError(
            f"feature_dim must exceed {SHIFT_START} to host the shift subspace"
        )
    return DomainSpec(
        domain=Domain.REAL,
        n_per_target=n_per_target,
        bias_ratio=bias_ratio,
        signal_mean=_on_dims(feature_dim, SIGNAL_DIMS, signal_magnitude),
        spurious_mean=_on_dims(feature_dim, SPURIOUS_DIMS, spurious_magnitude),
        domain_shift=(0.0,) * feature_dim,
        noise_sigma=noise_sigma,
    )


def default_synthetic_shift(feature_dim=20, magnitude=0.8):
    return _on_dims(feature_dim, range(SHIFT_START, feature_dim), magnitude)


def _features(spec, target, protected, rng):
    noise = rng.normal(0.0, spec.noise_sigma, size=(len(target), spec.feature_dim))
    return (
        target[:, None] * np.array(spec.signal_mean)
        + protected[:, None] * np.array(spec.spurious_mean)
        + np.array(spec.domain_shift)
        + noise
    )


def _domain_codes(spec, count):
    return np.full(count, DOMAINS.index(spec.domain), dtype=np.int64)


def generate_domain_dataset(spec, seed):
    """n_per_target examples per label with P(s == y) = bias_ratio"""
    spec.validate()
    rng = np.random.default_rng(seed)
    count = spec.num_examples
    target = np.repeat(np.array([0, 1], dtype=np.int64), spec.n_per_target)
    agrees = rng.random(count) < spec.bias_ratio
    protected = np.where(agrees, target, 1 - target)
    features = _features(spec, target, protected, rng)
    order = rng.permutation(count)
    dataset = Dataset(
        features=features[order],
        target=target[order],
        protected=protected[order],
        domain=_domain_codes(spec, count),
        spec_fingerprint=fingerprint({"spec": spec.to_dict(), "seed": int(seed)}),
    )
    logger.debug(f"generated {dataset} ({spec.domain.value}, bias {spec.bias_ratio})")
    return dataset


def generate_balanced_dataset(spec, per_cell, seed, pool_per_cell=None):
    """
    Exactly per_cell examples in every (y, s) cell.

    With pool_per_cell, that many examples are drawn per cell first and
    per_cell of them are kept uniformly at random.
    """
    spec.validate()
    if per_cell < 1:
        raise PreconditionError(f"per_cell must be positive, got {per_cell}")
    pool = per_cell if pool_per_cell is None else int(pool_per_cell)
    if pool < per_cell:
        raise ConfigurationError(
            f"pool of {pool} per cell cannot supply {per_cell} per cell"
        )
    rng = np.random.default_rng(seed)
    target = np.repeat(np.array([y for y, _ in CELLS], dtype=np.int64), pool)
    protected = np.repeat(np.array([s for _, s in CELLS], dtype=np.int64), pool)
    features = _features(spec, target, protected, rng)
    if pool > per_cell:
        keep = np.concatenate([
            index * pool + np.sort(rng.choice(pool, size=per_cell, replace=False))
            for index in range(len(CELLS))
        ])
    else:
        keep = np.arange(len(target))
    order = keep[rng.permutation(len(keep))]
    return Dataset(
        features=features[order],
        target=target[order],
        protected=protected[order],
        domain=_domain_codes(spec, len(order)),
        spec_fingerprint=fingerprint({
            "spec": spec.to_dict(),
            "per_cell": int(per_cell),
            "pool_per_cell": pool,
            "seed": int(seed),
        }),
    )


def generate_test_set(real_spec, per_cell, seed):
    """Balanced real-domain held-out set"""
    return generate_balanced_dataset(
        real_spec.replace(domain=Domain.REAL, bias_ratio=0.5), per_cell, seed
    )


def synthetic_spec(real_spec, bias_ratio=None, shift=None):
    return real_spec.replace(
        domain=Domain.SYNTHETIC,
        bias_ratio=real_spec.bias_ratio if bias_ratio is None else bias_ratio,
        domain_shift=(
            default_synthetic_shift(real_spec.feature_dim)
            if shift is None else tuple(shift)
        ),
    )


def synthetic_cell_size(num_real, syn_ratio=1.0):
    return int(np.floor(syn_ratio * num_real / NUM_GROUPS))


def generate_triplet(
    real_spec,
    bias_ratio_s1=None,
    seed=0,
    syn_ratio=1.0,
    synthetic_shift=None,
    pool_per_cell=None,
):
    """(D_R, D_S1, D_S2) from three independent sub-seeds of seed"""
    if real_spec.domain is not Domain.REAL:
        raise PreconditionError("generate_triplet needs a real-domain spec")
    num_real = real_spec.num_examples
    if num_real < NUM_GROUPS:
        raise PreconditionError(
            f"N_R={num_real} is smaller than the group count {NUM_GROUPS}"
        )
    per_cell = synthetic_cell_size(num_real, syn_ratio)
    if per_cell < 1:
        raise PreconditionError(
            f"synthetic ratio {syn_ratio} leaves no example per cell"
        )
    remainder = int(syn_ratio * num_real) - NUM_GROUPS * per_cell
    if remainder > 0:
        logger.warning(
            f"balanced synthetic set drops {remainder} examples "\
            f"to keep {per_cell} per cell"
        )
    real_seed, biased_seed, balanced_seed = derive_seeds(seed, 3)
    s1_spec = synthetic_spec(real_spec, bias_ratio_s1, synthetic_shift)
    d_r = generate_domain_dataset(real_spec, real_seed)
    d_s1 = generate_domain_dataset(s1_spec, biased_seed)
    d_s2 = generate_balanced_dataset(
        s1_spec.replace(bias_ratio=0.5), per_cell, balanced_seed, pool_per_cell
    )
    logger.info(
        f"generated triplet: D_R {len(d_r)}, D_S1 {len(d_s1)} "\
        f"(bias {s1_spec.bias_ratio}), D_S2 {len(d_s2)}"
    )
    return d_r, d_s1, d_s2
