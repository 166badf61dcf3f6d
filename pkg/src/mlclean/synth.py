"""Synthetic dataset generators for benchmarks and demos."""

from __future__ import annotations

import numpy as np

from .dataset import Dataset, Record, Schema

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def synth_schema(n_numeric: int = 2) -> Schema:
    return Schema(
        id_column="id",
        weight_column="weight",
        name_columns=("name",),
        numeric_features=tuple(f"f{i}" for i in range(n_numeric)),
        categorical_features=("grp",),
        sensitive_column="grp",
        sensitive_groups=("A", "B"),
        label_column="label",
    )


def _random_name(rng: np.random.Generator, length: int = 8) -> str:
    return "".join(_ALPHABET[int(i)] for i in rng.integers(0, 26, size=length))


def make_clustered_dataset(
    n: int,
    n_clusters: int = 10,
    separation: float = 30.0,
    spread: float = 1.0,
    seed: int = 0,
    n_numeric: int = 2,
) -> Dataset:
    """Well-separated Gaussian blobs with unique names.

    Blob index drives nothing but geometry; labels follow a linear rule on
    the within-blob offset so a linear model has signal to find.
    """
    rng = np.random.default_rng(seed)
    schema = synth_schema(n_numeric)
    centers = rng.normal(scale=separation, size=(n_clusters, n_numeric))
    records = []
    for i in range(n):
        c = int(rng.integers(n_clusters))
        offset = rng.normal(scale=spread, size=n_numeric)
        x = centers[c] + offset
        label = int(offset.sum() + rng.normal(scale=0.5) > 0)
        group = "A" if rng.random() < 0.5 else "B"
        records.append(
            Record(
                id=f"r{i}",
                weight=1.0,
                names={"name": _random_name(rng)},
                numeric={f"f{j}": float(x[j]) for j in range(n_numeric)},
                categorical={"grp": group},
                group=group,
                label=label,
            )
        )
    return Dataset(schema=schema, records=tuple(records))


def make_biased_dataset(
    n: int = 2000,
    seed: int = 0,
    n_numeric: int = 2,
    positive_keep_rate: float = 0.25,
) -> Dataset:
    """A single-blob dataset where group A's positives are undersampled.

    Labels follow a logistic rule on the numeric features; examples from
    group A that draw a positive label are rejected and redrawn with
    probability ``1 - positive_keep_rate`` (default keeps 1 in 4), which
    biases the observed positive ratio 4:1 against group A.
    """
    rng = np.random.default_rng(seed)
    schema = synth_schema(n_numeric)
    coefs = np.ones(n_numeric)
    records = []
    for i in range(n):
        group = "A" if rng.random() < 0.5 else "B"
        while True:
            x = rng.normal(size=n_numeric)
            label = int(rng.random() < 1.0 / (1.0 + np.exp(-2.0 * (coefs @ x))))
            if group == "A" and label == 1 and rng.random() > positive_keep_rate:
                continue
            break
        records.append(
            Record(
                id=f"r{i}",
                weight=1.0,
                names={"name": _random_name(rng)},
                numeric={f"f{j}": float(x[j]) for j in range(n_numeric)},
                categorical={"grp": group},
                group=group,
                label=label,
            )
        )
    return Dataset(schema=schema, records=tuple(records))
