from dataclasses import dataclass
from enum import Enum

import numpy as np

from fairtune.errors import PreconditionError
from fairtune.net.model import DatasetTag


class Criterion(str, Enum):
    ABSOLUTE_DIFFERENCE = "absolute_difference"
    COSINE_SIMILARITY = "cosine_similarity"


@dataclass(frozen=True)
class SensitivityScores:
    """delta1 measures domain sensitivity, delta2 fairness sensitivity"""
    delta1: tuple
    delta2: tuple
    criterion: Criterion

    def __post_init__(self):
        object.__setattr__(self, "delta1", tuple(float(v) for v in self.delta1))
        object.__setattr__(self, "delta2", tuple(float(v) for v in self.delta2))
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        if len(self.delta1) != len(self.delta2):
            raise PreconditionError("delta1 and delta2 cover different group counts")
        if not all(np.isfinite(self.delta1 + self.delta2)):
            raise PreconditionError("sensitivity scores must be finite")

    @property
    def num_groups(self):
        return len(self.delta1)


@dataclass(frozen=True)
class Rankings:
    """r1 least domain-sensitive first, r2 most fairness-sensitive first"""
    r1: tuple
    r2: tuple

    def __post_init__(self):
        object.__setattr__(self, "r1", tuple(int(v) for v in self.r1))
        object.__setattr__(self, "r2", tuple(int(v) for v in self.r2))
        expected = list(range(len(self.r1)))
        if sorted(self.r1) != expected or sorted(self.r2) != expected:
            raise PreconditionError("rankings must be permutations of the group ids")

    @property
    def num_groups(self):
        return len(self.r1)


EXPECTED_TAGS = (
    DatasetTag.REAL_BIASED,
    DatasetTag.SYNTHETIC_BIASED,
    DatasetTag.SYNTHETIC_BALANCED,
)


def _mean_absolute_difference(first, second):
    return float(np.mean(np.abs(first - second)))


def _cosine(first, second):
    first, second = first.ravel(), second.ravel()
    norms = np.linalg.norm(first) * np.linalg.norm(second)
    if norms == 0:
        return 0.0
    return float(np.clip(np.dot(first, second) / norms, -1.0, 1.0))


def sensitivity_scores(g_r, g_s1, g_s2, criterion=Criterion.ABSOLUTE_DIFFERENCE):
    """Per-group delta1 from (g_R, g_S1) and delta2 from (g_S1, g_S2)"""
    criterion = Criterion(criterion)
    snapshots = (g_r, g_s1, g_s2)
    for snapshot, tag in zip(snapshots, EXPECTED_TAGS):
        if snapshot.dataset_tag is not tag:
            raise PreconditionError(
                f"expected a {tag.value} snapshot, got {snapshot.dataset_tag.value}"
            )
    shapes = [tuple(grad.shape for grad in s.per_group) for s in snapshots]
    if len(set(shapes)) != 1:
        raise PreconditionError("gradient snapshots come from different models")

    measure = (
        _mean_absolute_difference
        if criterion is Criterion.ABSOLUTE_DIFFERENCE else _cosine
    )
    return SensitivityScores(
        delta1=[measure(r, s1) for r, s1 in zip(g_r.per_group, g_s1.per_group)],
        delta2=[measure(s1, s2) for s1, s2 in zip(g_s1.per_group, g_s2.per_group)],
        criterion=criterion,
    )


def _order(keys):
    ## primary key ascending, ties by ascending group id
    keys = np.asarray(keys, dtype=np.float64)
    return tuple(int(i) for i in np.lexsort((np.arange(len(keys)), keys)))


def rank_scores(scores):
    """
    Absolute differences: r1 ascending delta1, r2 descending delta2.
    Cosine similarities reverse both directions, so the most aligned
    (g_R, g_S1) pair and the least aligned (g_S1, g_S2) pair come first.
    """
    delta1 = np.array(scores.delta1)
    delta2 = np.array(scores.delta2)
    if scores.criterion is Criterion.ABSOLUTE_DIFFERENCE:
        return Rankings(r1=_order(delta1), r2=_order(-delta2))
    return Rankings(r1=_order(-delta1), r2=_order(delta2))
