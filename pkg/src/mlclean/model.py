"""Weight-aware linear classifier and the two evaluation metrics.

Logistic regression trained by full-batch gradient descent on a
weight-normalized loss, so scaling every example weight by a constant
leaves the fit unchanged. Metrics: plain accuracy and the demographic
parity ratio (groupA positive-prediction rate over groupB's).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, Schema, featurize
from .errors import MLCleanError, ParameterError


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    l2_lambda: float = 1e-4
    convergence_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ParameterError("learning_rate must be positive")
        if self.epochs < 0:
            raise ParameterError("epochs must be >= 0")
        if self.l2_lambda < 0:
            raise ParameterError("l2_lambda must be >= 0")


@dataclass(frozen=True)
class LinearModel:
    """Fitted coefficients plus the training-time featurization encoding."""

    columns: tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    stats: dict[str, tuple[float, float]]
    categories: dict[str, tuple[str, ...]]
    threshold: float = 0.5
    step_halvings: int = 0

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for col, coef in zip(self.columns, self.coefficients):
                fh.write(f"coef\t{col}\t{float(coef)!r}\n")
            fh.write(f"intercept\t\t{float(self.intercept)!r}\n")
            for col, (mean, std) in self.stats.items():
                fh.write(f"stat\t{col}\t{float(mean)!r}\t{float(std)!r}\n")
            for col, cats in self.categories.items():
                fh.write(f"categories\t{col}\t" + "\t".join(cats) + "\n")


def load_model(path) -> LinearModel:
    columns: list[str] = []
    coefs: list[float] = []
    intercept = 0.0
    stats: dict[str, tuple[float, float]] = {}
    categories: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            kind = parts[0]
            if kind == "coef":
                columns.append(parts[1])
                coefs.append(float(parts[2]))
            elif kind == "intercept":
                intercept = float(parts[2])
            elif kind == "stat":
                stats[parts[1]] = (float(parts[2]), float(parts[3]))
            elif kind == "categories":
                categories[parts[1]] = tuple(parts[2:])
    return LinearModel(
        columns=tuple(columns),
        coefficients=np.array(coefs),
        intercept=intercept,
        stats=stats,
        categories=categories,
    )


def _design(d: Dataset, model: LinearModel | None = None):
    if model is None:
        fm = featurize(d)
    else:
        fm = featurize(d, stats=model.stats, categories=model.categories)
        if fm.columns != model.columns:
            raise ParameterError("dataset features do not match the model's columns")
    return fm


def loss_and_gradient(
    X: np.ndarray,
    y: np.ndarray,
    w_norm: np.ndarray,
    theta: np.ndarray,
    intercept: float,
    l2_lambda: float,
):
    """Weighted, weight-normalized logistic loss and its gradient.

    The intercept is unregularized. Uses log1p/exp formulations that stay
    finite for large |z|.
    """
    z = X @ theta + intercept
    # log(1 + e^z) computed stably.
    softplus = np.where(z > 0, z + np.log1p(np.exp(-np.abs(z))), np.log1p(np.exp(z)))
    loss = float(w_norm @ (softplus - y * z) + l2_lambda * (theta @ theta))
    p = 1.0 / (1.0 + np.exp(-z))
    residual = w_norm * (p - y)
    grad_theta = X.T @ residual + 2.0 * l2_lambda * theta
    grad_intercept = float(residual.sum())
    return loss, grad_theta, grad_intercept


def train(d: Dataset, cfg: TrainConfig | None = None) -> LinearModel:
    """Fit logistic regression by deterministic full-batch gradient descent.

    Parameters start at zero; training stops after ``epochs`` steps or when
    the loss decrease falls below ``convergence_tol``. If a step would
    increase the loss the learning rate is halved and the step retried (the
    count of halvings is recorded on the model).
    """
    cfg = cfg or TrainConfig()
    labels = {r.label for r in d.records}
    if labels != {0, 1}:
        raise MLCleanError("training requires both labels present")
    fm = _design(d)
    X = fm.matrix
    y = np.array([r.label for r in d.records], dtype=float)
    w = np.array([r.weight for r in d.records], dtype=float)
    if w.sum() <= 0:
        raise MLCleanError("training requires positive total weight")
    w_norm = w / w.sum()
    theta = np.zeros(X.shape[1])
    intercept = 0.0
    lr = cfg.learning_rate
    halvings = 0
    loss, g_theta, g_b = loss_and_gradient(X, y, w_norm, theta, intercept, cfg.l2_lambda)
    for _ in range(cfg.epochs):
        while True:
            new_theta = theta - lr * g_theta
            new_intercept = intercept - lr * g_b
            new_loss, new_gt, new_gb = loss_and_gradient(
                X, y, w_norm, new_theta, new_intercept, cfg.l2_lambda
            )
            if new_loss <= loss or halvings >= 60:
                break
            lr /= 2.0
            halvings += 1
        delta = loss - new_loss
        theta, intercept = new_theta, new_intercept
        loss, g_theta, g_b = new_loss, new_gt, new_gb
        if abs(delta) < cfg.convergence_tol:
            break
    return LinearModel(
        columns=fm.columns,
        coefficients=theta,
        intercept=intercept,
        stats=fm.stats,
        categories=fm.categories,
        step_halvings=halvings,
    )


def predict(m: LinearModel, d: Dataset) -> dict[str, int]:
    """Predicted label per record id; probability >= 0.5 predicts 1."""
    fm = _design(d, m)
    z = fm.matrix @ m.coefficients + m.intercept
    return {rid: int(zv >= 0.0) for rid, zv in zip(fm.row_ids, z)}


def accuracy(predicted: dict[str, int], actual: dict[str, int]) -> float:
    """Unweighted fraction of exact matches over a shared id set."""
    if set(predicted) != set(actual):
        raise ParameterError("predicted and actual must cover the same ids")
    if not predicted:
        raise ParameterError("accuracy of an empty set is undefined")
    hits = sum(1 for rid, p in predicted.items() if p == actual[rid])
    return hits / len(predicted)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    parity_ratio: float | None         # None means UNDEFINED (groupB rate 0)
    positive_rates: dict[str, float]
    group_counts: dict[str, int]

    @property
    def parity_defined(self) -> bool:
        return self.parity_ratio is not None


def parity_ratio(
    predicted: dict[str, int], groups: dict[str, str], schema: Schema
) -> float | None:
    """groupA positive-prediction rate over groupB's; may exceed 1.

    Returns None (UNDEFINED) when groupB's rate is zero.
    """
    ga, gb = schema.sensitive_groups
    rates = {}
    for g in (ga, gb):
        ids = [rid for rid in predicted if groups[rid] == g]
        if not ids:
            raise ParameterError(f"group {g!r} is empty in the evaluated set")
        rates[g] = sum(predicted[rid] for rid in ids) / len(ids)
    if rates[gb] == 0:
        return None
    return rates[ga] / rates[gb]


def evaluate(m: LinearModel, d: Dataset) -> MetricsReport:
    """Accuracy and parity ratio of a model over a dataset."""
    preds = predict(m, d)
    actual = {r.id: r.label for r in d.records}
    groups = {r.id: r.group for r in d.records}
    ga, gb = d.schema.sensitive_groups
    rates = {}
    counts = {}
    for g in (ga, gb):
        ids = [rid for rid in preds if groups[rid] == g]
        counts[g] = len(ids)
        rates[g] = sum(preds[rid] for rid in ids) / len(ids) if ids else float("nan")
    ratio = parity_ratio(preds, groups, d.schema) if all(counts.values()) else None
    return MetricsReport(
        accuracy=accuracy(preds, actual),
        parity_ratio=ratio,
        positive_rates=rates,
        group_counts=counts,
    )
