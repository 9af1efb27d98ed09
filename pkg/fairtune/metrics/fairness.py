from dataclasses import dataclass

import numpy as np

from fairtune.errors import ShapeError, UndefinedStratumError
from fairtune.net.model import predict


METRICS = ("acc", "wst", "eo", "std")
CELL_FIELDS = tuple(f"cell_acc_y{y}s{s}" for y in (0, 1) for s in (0, 1))
RECORD_FIELDS = METRICS + CELL_FIELDS


@dataclass(frozen=True, eq=False)
class GroupStats:
    """counts[s, y, y_hat]"""
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (2, 2, 2):
            raise ShapeError(f"group counts must be 2x2x2, got {counts.shape}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def stratum_size(self, s, y):
        return int(self.counts[s, y].sum())

    def rate(self, s, y, y_hat):
        """P_s(Y_hat = y_hat | Y = y)"""
        size = self.stratum_size(s, y)
        if size == 0:
            raise UndefinedStratumError(s, y)
        return self.counts[s, y, y_hat] / size

    def rates(self):
        rates = np.empty((2, 2, 2))
        for s in (0, 1):
            for y in (0, 1):
                for y_hat in (0, 1):
                    rates[s, y, y_hat] = self.rate(s, y, y_hat)
        return rates


@dataclass(frozen=True)
class FairnessReport:
    acc: float
    cell_acc: tuple
    wst: float
    eo: float
    std: float
    counts: tuple
    fingerprint: str = ""

    def cell(self, y, s):
        return self.cell_acc[y][s]

    def to_record(self):
        record = {"acc": self.acc, "wst": self.wst, "eo": self.eo, "std": self.std}
        for y in (0, 1):
            for s in (0, 1):
                record[f"cell_acc_y{y}s{s}"] = self.cell_acc[y][s]
        for name in RECORD_FIELDS:
            record[f"{name}_pct"] = 100.0 * record[name]
        record["counts"] = [[list(row) for row in plane] for plane in self.counts]
        record["fingerprint"] = self.fingerprint
        return record


def confusion_by_group(predictions, dataset):
    predictions = np.asarray(predictions, dtype=np.int64)
    if len(predictions) != len(dataset):
        raise ShapeError(
            f"{len(predictions)} predictions for {len(dataset)} examples"
        )
    counts = np.zeros((2, 2, 2), dtype=np.int64)
    np.add.at(counts, (dataset.protected, dataset.target, predictions), 1)
    return GroupStats(counts)


def fairness_report(stats, fingerprint=""):
    """ACC, per-cell accuracy, worst-group accuracy, EO and group STD"""
    rates = stats.rates()
    cell_acc = tuple(
        tuple(float(rates[s, y, y]) for s in (0, 1)) for y in (0, 1)
    )
    eo = sum(
        abs(rates[0, y, y_hat] - rates[1, y, y_hat])
        for y in (0, 1) for y_hat in (0, 1)
    ) / 4.0
    cells = np.array(cell_acc).ravel()
    counts = stats.counts
    correct = int(sum(counts[s, y, y] for s in (0, 1) for y in (0, 1)))
    return FairnessReport(
        acc=correct / int(counts.sum()),
        cell_acc=cell_acc,
        wst=float(cells.min()),
        eo=float(eo),
        std=float(np.std(cells)),
        counts=tuple(tuple(tuple(int(c) for c in row) for row in plane) for plane in counts),
        fingerprint=fingerprint,
    )


def equalized_odds_rate_gaps(stats):
    """(|delta TPR| + |delta FPR|) / 2"""
    tpr_gap = abs(stats.rate(0, 1, 1) - stats.rate(1, 1, 1))
    fpr_gap = abs(stats.rate(0, 0, 1) - stats.rate(1, 0, 1))
    return float((tpr_gap + fpr_gap) / 2.0)


def evaluate(model, dataset):
    return fairness_report(
        confusion_by_group(predict(model, dataset), dataset),
        fingerprint=dataset.spec_fingerprint,
    )


def error_set(model, dataset):
    """Indices of misclassified examples"""
    return np.flatnonzero(predict(model, dataset) != dataset.target)


def aggregate_reports(reports):
    """Field-wise mean and population standard deviation"""
    if not reports:
        return {}, {}
    records = [report.to_record() for report in reports]
    means, stds = {}, {}
    for name in RECORD_FIELDS:
        values = np.array([record[name] for record in records])
        means[name] = float(values.mean())
        stds[name] = float(values.std())
    return means, stds
