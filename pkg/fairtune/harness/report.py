import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from fairtune import __version__
from fairtune.errors import FairtuneError
from fairtune.metrics.fairness import aggregate_reports


logger = logging.getLogger("fairtune")

TABLE_METRICS = ("acc", "wst", "eo", "std")


@dataclass
class SweepRow:
    point: str
    value: object
    strategy: str
    seeds: list
    failed_seeds: list
    means: dict
    stds: dict
    k: int = None
    parameter_fraction: float = None

    def to_dict(self):
        return {
            "point": self.point,
            "value": self.value,
            "strategy": self.strategy,
            "seeds": list(self.seeds),
            "failed_seeds": list(self.failed_seeds),
            "mean": dict(self.means),
            "std": dict(self.stds),
            "k": self.k,
            "parameter_fraction": self.parameter_fraction,
        }

    def table_row(self, axis):
        row = {
            "axis": axis,
            "point": self.point,
            "value": self.value,
            "strategy": self.strategy,
            "num_seeds": len(self.seeds),
            "num_failed": len(self.failed_seeds),
            "k": self.k,
            "parameter_fraction": self.parameter_fraction,
        }
        for name in TABLE_METRICS:
            row[name] = self.means.get(name, np.nan)
            row[f"{name}_std"] = self.stds.get(name, np.nan)
            row[f"{name}_pct"] = 100.0 * row[name]
        return row


@dataclass
class SweepReport:
    axis: str
    config_hash: str
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    best: str = None
    version: str = __version__

    @property
    def has_failures(self):
        return bool(self.failures)

    def row(self, point, strategy):
        for row in self.rows:
            if row.point == point and row.strategy == strategy:
                return row
        raise KeyError((point, strategy))

    def best_row(self, strategy=None):
        """Lowest mean EO among rows with surviving seeds; higher ACC breaks ties"""
        rows = [
            row for row in self.rows
            if row.seeds and (strategy is None or row.strategy == strategy)
        ]
        if not rows:
            return None
        return min(rows, key=lambda row: (row.means["eo"], -row.means["acc"]))

    def to_dict(self):
        return {
            "axis": self.axis,
            "config_hash": self.config_hash,
            "version": self.version,
            "rows": [row.to_dict() for row in self.rows],
            "failures": list(self.failures),
            "best": self.best,
        }

    def frame(self):
        return pd.DataFrame([row.table_row(self.axis) for row in self.rows])


def _mask_k(outcomes):
    ks = {outcome.record.mask.k for outcome in outcomes if outcome.record.mask is not None}
    return ks.pop() if len(ks) == 1 else None


def _mean_detail(outcomes, key):
    values = [
        outcome.record.details[key]
        for outcome in outcomes if key in outcome.record.details
    ]
    return float(np.mean(values)) if values else None


def aggregate_outcomes(axis, outcomes, config_hash):
    """One row per (point, strategy) in first-seen order, seeds aggregated"""
    grouped = {}
    for outcome in outcomes:
        job = outcome.job
        grouped.setdefault((job.point, job.strategy.value), []).append(outcome)

    report = SweepReport(axis=axis, config_hash=config_hash)
    for (point, strategy), members in grouped.items():
        succeeded = [outcome for outcome in members if not outcome.failed]
        failed = [outcome for outcome in members if outcome.failed]
        means, stds = aggregate_reports([outcome.report for outcome in succeeded])
        report.rows.append(SweepRow(
            point=point,
            value=members[0].job.value,
            strategy=strategy,
            seeds=[outcome.job.seed for outcome in succeeded],
            failed_seeds=[outcome.job.seed for outcome in failed],
            means=means,
            stds=stds,
            k=_mask_k(succeeded),
            parameter_fraction=_mean_detail(succeeded, "parameter_fraction"),
        ))
        report.failures.extend(outcome.to_dict() for outcome in failed)
    return report


def _write(path, text):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as err:
        raise FairtuneError(f"cannot write {path}: {err}") from err


def write_report(report, output_dir, table_name):
    """
    report.json and the CSV table are byte-deterministic; the timestamp
    lives in metadata.json only.
    """
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise FairtuneError(f"cannot create {output_dir}: {err}") from err

    _write(
        output_dir / "report.json",
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n",
    )
    _write(
        output_dir / "metadata.json",
        json.dumps({
            "config_hash": report.config_hash,
            "version": report.version,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }, sort_keys=True, indent=2) + "\n",
    )
    table = output_dir / table_name
    try:
        report.frame().to_csv(table, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as err:
        raise FairtuneError(f"cannot write {table}: {err}") from err
    logger.info(
        f"wrote {len(report.rows)} rows and {len(report.failures)} failures "\
        f"to {output_dir}"
    )
    return output_dir / "report.json"
