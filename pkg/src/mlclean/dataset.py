"""Tabular data model: schema, records, CSV ingestion and featurization.

Everything downstream (sanitization, entity resolution, reweighing, model
training) consumes the immutable :class:`Dataset` defined here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError, SchemaError, ValidationError

PROVENANCE_COLUMN = "provenance"


@dataclass(frozen=True)
class Schema:
    """Column roles for a tabular training set.

    ``sensitive_groups`` is an ordered pair; its order fixes the orientation
    of the parity-ratio metric (groupA rate / groupB rate).
    """

    id_column: str
    name_columns: tuple[str, ...]
    numeric_features: tuple[str, ...]
    categorical_features: tuple[str, ...]
    sensitive_column: str
    sensitive_groups: tuple[str, str]
    label_column: str
    weight_column: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "name_columns", tuple(self.name_columns))
        object.__setattr__(self, "numeric_features", tuple(self.numeric_features))
        object.__setattr__(
            self, "categorical_features", tuple(self.categorical_features)
        )
        object.__setattr__(self, "sensitive_groups", tuple(self.sensitive_groups))
        if len(self.sensitive_groups) != 2:
            raise SchemaError("sensitive_groups must name exactly two groups")
        # The sensitive column may double as a categorical feature; every
        # other role must use a distinct column name.
        roles = [self.id_column, self.label_column]
        if self.weight_column is not None:
            roles.append(self.weight_column)
        roles += (
            list(self.name_columns)
            + list(self.numeric_features)
            + list(self.categorical_features)
        )
        if len(roles) != len(set(roles)):
            raise SchemaError("schema column names must be distinct")
        if self.sensitive_column in roles and (
            self.sensitive_column not in self.categorical_features
        ):
            raise SchemaError("sensitive_column collides with another role")

    def columns(self) -> list[str]:
        """All distinct column names, in canonical serialization order."""
        cols = [self.id_column]
        if self.weight_column is not None:
            cols.append(self.weight_column)
        for c in (
            self.name_columns
            + self.numeric_features
            + self.categorical_features
            + (self.sensitive_column, self.label_column)
        ):
            if c not in cols:
                cols.append(c)
        return cols


@dataclass(frozen=True)
class Record:
    """One training example.

    ``provenance`` tracks the original ids a (possibly merged) record came
    from; for unmerged records it is ``{id}``.
    """

    id: str
    weight: float
    names: dict[str, str]
    numeric: dict[str, float]
    categorical: dict[str, str]
    group: str
    label: int
    provenance: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.provenance:
            object.__setattr__(self, "provenance", frozenset({self.id}))

    def value(self, column: str, schema: Schema) -> str:
        """The serialized cell value for ``column``."""
        if column == schema.id_column:
            return self.id
        if column == schema.weight_column:
            return repr(self.weight)
        if column in self.names:
            return self.names[column]
        if column in self.numeric:
            v = self.numeric[column]
            return repr(int(v)) if float(v).is_integer() else repr(v)
        if column in self.categorical:
            return self.categorical[column]
        if column == schema.sensitive_column:
            return self.group
        if column == schema.label_column:
            return str(self.label)
        raise SchemaError(f"record has no column {column!r}")


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of records under one schema."""

    schema: Schema
    records: tuple[Record, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        ids = [r.id for r in self.records]
        if len(ids) != len(set(ids)):
            raise ValidationError("record ids must be unique")
        groups = set(self.schema.sensitive_groups)
        for r in self.records:
            if r.weight < 0:
                raise ValidationError(f"record {r.id}: negative weight")
            if r.group not in groups:
                raise ValidationError(f"record {r.id}: unknown group {r.group!r}")
            if r.label not in (0, 1):
                raise ValidationError(f"record {r.id}: label must be 0 or 1")

    def __len__(self) -> int:
        return len(self.records)

    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    def by_id(self, rid: str) -> Record:
        for r in self.records:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def total_weight(self) -> float:
        return float(sum(r.weight for r in self.records))

    def replace_records(self, records) -> "Dataset":
        return replace(self, records=tuple(records))


@dataclass(frozen=True)
class FeatureMatrix:
    """Standardized numeric + one-hot categorical design matrix.

    ``stats`` maps each numeric column to its (mean, population std);
    ``categories`` pins the one-hot category order so a matrix built at
    prediction time lines up with the training columns.
    """

    row_ids: tuple[str, ...]
    columns: tuple[str, ...]
    matrix: np.ndarray
    stats: dict[str, tuple[float, float]]
    categories: dict[str, tuple[str, ...]]

    @property
    def width(self) -> int:
        return self.matrix.shape[1]

    def row(self, rid: str) -> np.ndarray:
        return self.matrix[self.row_ids.index(rid)]

    def unstandardize(self, column: str, values: np.ndarray) -> np.ndarray:
        mean, std = self.stats[column]
        return values * (std if std > 0 else 0.0) + mean


def _parse_row(schema: Schema, row: dict[str, str], line: int) -> Record:
    def cell(col: str) -> str:
        v = row.get(col)
        if v is None or v == "":
            raise ValidationError(f"row {line}: missing value in column {col!r}")
        return v

    numeric = {}
    for col in schema.numeric_features:
        raw = cell(col)
        try:
            numeric[col] = float(raw)
        except ValueError:
            raise ValidationError(
                f"row {line}: non-numeric value {raw!r} in column {col!r}"
            ) from None
    label_raw = cell(schema.label_column)
    if label_raw not in ("0", "1"):
        raise ValidationError(f"row {line}: label must be 0 or 1, got {label_raw!r}")
    weight = 1.0
    if schema.weight_column is not None:
        raw = cell(schema.weight_column)
        try:
            weight = float(raw)
        except ValueError:
            raise ValidationError(
                f"row {line}: non-numeric weight {raw!r}"
            ) from None
    rid = cell(schema.id_column)
    prov_raw = row.get(PROVENANCE_COLUMN, "")
    provenance = frozenset(prov_raw.split(";")) if prov_raw else frozenset({rid})
    return Record(
        id=rid,
        weight=weight,
        names={c: cell(c) for c in schema.name_columns},
        numeric=numeric,
        categorical={c: cell(c) for c in schema.categorical_features},
        group=cell(schema.sensitive_column),
        label=int(label_raw),
        provenance=provenance,
    )


def load_dataset(path, schema: Schema) -> Dataset:
    """Read a comma-separated UTF-8 file with a header row into a Dataset.

    A missing weight column gives every record weight 1.0. Missing cells,
    non-binary labels, and non-numeric feature values are validation errors
    naming the offending row.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in schema.columns():
            if col not in header:
                raise SchemaError(f"missing column {col!r} in {path}")
        records = [_parse_row(schema, row, i) for i, row in enumerate(reader, start=2)]
    return Dataset(schema=schema, records=tuple(records))


def save_dataset(d: Dataset, path) -> None:
    """Write a Dataset so that ``load_dataset`` round-trips it exactly.

    Provenance is serialized as a semicolon-joined id list in an extra
    trailing column.
    """
    cols = d.schema.columns()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols + [PROVENANCE_COLUMN])
        for r in d.records:
            writer.writerow(
                [r.value(c, d.schema) for c in cols] + [";".join(sorted(r.provenance))]
            )


def featurize(
    d: Dataset,
    stats: dict[str, tuple[float, float]] | None = None,
    categories: dict[str, tuple[str, ...]] | None = None,
) -> FeatureMatrix:
    """Build the standardized design matrix for a dataset.

    Numeric features are z-scored with the population standard deviation
    (constant columns map to all zeros). Categorical features are one-hot
    encoded over the sorted set of observed values. Passing ``stats`` and
    ``categories`` reuses a training-time encoding, e.g. for prediction.
    """
    if len(d) == 0:
        raise ParameterError("cannot featurize an empty dataset")
    schema = d.schema
    out_stats: dict[str, tuple[float, float]] = {}
    out_cats: dict[str, tuple[str, ...]] = {}
    columns: list[str] = []
    blocks: list[np.ndarray] = []
    for col in schema.numeric_features:
        raw = np.array([r.numeric[col] for r in d.records], dtype=float)
        if stats is not None:
            mean, std = stats[col]
        else:
            mean = float(raw.mean())
            std = float(raw.std())
        out_stats[col] = (mean, std)
        z = (raw - mean) / std if std > 0 else np.zeros_like(raw)
        columns.append(col)
        blocks.append(z[:, None])
    for col in schema.categorical_features:
        values = [r.categorical[col] for r in d.records]
        cats = (
            categories[col] if categories is not None else tuple(sorted(set(values)))
        )
        out_cats[col] = cats
        onehot = np.zeros((len(values), len(cats)))
        index = {v: j for j, v in enumerate(cats)}
        for i, v in enumerate(values):
            j = index.get(v)
            if j is not None:
                onehot[i, j] = 1.0
        columns.extend(f"{col}={v}" for v in cats)
        blocks.append(onehot)
    matrix = (
        np.hstack(blocks) if blocks else np.zeros((len(d), 0))
    )
    return FeatureMatrix(
        row_ids=tuple(d.ids()),
        columns=tuple(columns),
        matrix=matrix,
        stats=out_stats,
        categories=out_cats,
    )


def default_cluster_count(n: int) -> int:
    """Heuristic cluster count for sanitization when the caller gives none."""
    return max(1, round(math.sqrt(n / 2)))
