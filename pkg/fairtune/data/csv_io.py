import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from fairtune.data.dataset import DOMAINS, Dataset, Domain
from fairtune.errors import FairtuneError, ParseError
from fairtune.seeding import fingerprint


FEATURE_COLUMN = re.compile(r"^f(\d+)$")


@dataclass(frozen=True)
class CsvSchema:
    feature_columns: tuple
    target_column: str = "y"
    protected_column: str = "s"
    domain_column: str = "domain"

    @classmethod
    def for_dim(cls, feature_dim):
        return cls(feature_columns=tuple(f"f{i}" for i in range(feature_dim)))

    @classmethod
    def infer(cls, columns):
        found = sorted(
            (int(m.group(1)), name)
            for name in columns
            if (m := FEATURE_COLUMN.match(name))
        )
        return cls(feature_columns=tuple(name for _, name in found))


def _float_column(values, column):
    parsed = np.empty(len(values))
    for row, text in enumerate(values, start=1):
        try:
            parsed[row - 1] = float(text)
        except ValueError:
            raise ParseError(f"'{text}' is not numeric", row=row, column=column)
        if not math.isfinite(parsed[row - 1]):
            raise ParseError(f"'{text}' is not finite", row=row, column=column)
    return parsed


def _label_column(values, column):
    parsed = np.empty(len(values), dtype=np.int64)
    for row, text in enumerate(values, start=1):
        label = text.strip()
        if label not in ("0", "1"):
            raise ParseError(f"label '{text}' is not binary", row=row, column=column)
        parsed[row - 1] = int(label)
    return parsed


def _domain_column(values, column):
    parsed = np.empty(len(values), dtype=np.int64)
    for row, text in enumerate(values, start=1):
        try:
            parsed[row - 1] = DOMAINS.index(Domain(text.strip()))
        except ValueError:
            raise ParseError(f"unknown domain '{text}'", row=row, column=column)
    return parsed


def load_csv_dataset(path, schema=None):
    """Rows in file order; domain defaults to real when the column is absent"""
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise ParseError(f"cannot read {path}: {err}")
    if schema is None:
        schema = CsvSchema.infer(frame.columns)
    if not schema.feature_columns:
        raise ParseError(f"{path} has no feature columns")
    for column in (*schema.feature_columns, schema.target_column, schema.protected_column):
        if column not in frame.columns:
            raise ParseError(f"missing column in {path}", column=column)

    features = np.empty((len(frame), len(schema.feature_columns)))
    for index, column in enumerate(schema.feature_columns):
        features[:, index] = _float_column(frame[column].tolist(), column)
    if schema.domain_column in frame.columns:
        domain = _domain_column(frame[schema.domain_column].tolist(), schema.domain_column)
    else:
        domain = np.zeros(len(frame), dtype=np.int64)
    return Dataset(
        features=features.reshape(len(frame), len(schema.feature_columns)),
        target=_label_column(frame[schema.target_column].tolist(), schema.target_column),
        protected=_label_column(
            frame[schema.protected_column].tolist(), schema.protected_column
        ),
        domain=domain,
        spec_fingerprint=fingerprint({"csv_sha256": hashlib.sha256(path.read_bytes()).hexdigest()}),
    )


def dataset_frame(dataset):
    schema = CsvSchema.for_dim(dataset.feature_dim)
    frame = pd.DataFrame(dataset.features, columns=list(schema.feature_columns))
    frame[schema.target_column] = dataset.target
    frame[schema.protected_column] = dataset.protected
    frame[schema.domain_column] = [DOMAINS[code].value for code in dataset.domain]
    return frame


def write_csv_dataset(dataset, path):
    """17 significant digits, so features reload bit-exactly"""
    path = Path(path)
    try:
        dataset_frame(dataset).to_csv(
            path, index=False, float_format="%.17g", lineterminator="\n"
        )
    except OSError as err:
        raise FairtuneError(f"cannot write dataset to {path}: {err}") from err
    return path
