"""Benchmark harness: corruption injectors with ground truth, the ordering
benchmark, and the leave-ids-out accuracy diagnostic.

Injectors never touch existing records; they append copies or synthetic
attack records and report exactly which ids they added, so sanitization and
entity-resolution quality can be scored later.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Dataset, Record
from .errors import MLCleanError, ParameterError
from .model import TrainConfig, evaluate, train
from .pipeline import PipelineConfig, run_stages, split_dataset


@dataclass(frozen=True)
class DuplicateSpec:
    """How to replicate records: which fraction, how many copies (truncated
    Zipf), and how copies are perturbed."""

    duplication_rate: float = 0.2
    zipf_s: float = 2.0
    max_copies: int = 10
    abbreviation_prob: float = 0.5
    abbreviation_min: int = 3
    numeric_jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.duplication_rate <= 1.0:
            raise ParameterError("duplication_rate must be in [0, 1]")
        if not self.zipf_s > 1.0:
            raise ParameterError("zipf_s must be > 1")
        if self.max_copies < 1:
            raise ParameterError("max_copies must be >= 1")


@dataclass(frozen=True)
class PoisonSpec:
    """Out-of-range attack: synthetic records whose numeric features sit
    ``alpha`` standard deviations beyond the clean min/max, labeled against
    the clean majority."""

    epsilon: float = 0.1
    alpha: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ParameterError("epsilon must be in [0, 1)")
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")


@dataclass(frozen=True)
class GroundTruth:
    duplicate_clusters: dict[str, tuple[str, ...]] = field(default_factory=dict)
    poison_ids: frozenset[str] = frozenset()

    def duplicate_pairs(self) -> set[frozenset[str]]:
        pairs = set()
        for orig, copies in self.duplicate_clusters.items():
            members = [orig, *copies]
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    pairs.add(frozenset((members[i], members[j])))
        return pairs


def zipf_pmf(s: float, max_value: int) -> np.ndarray:
    """Normalized truncated Zipf mass function on {1..max_value}."""
    mass = np.array([k ** (-s) for k in range(1, max_value + 1)])
    return mass / mass.sum()


def inject_duplicates(d: Dataset, spec: DuplicateSpec) -> tuple[Dataset, GroundTruth]:
    """Append perturbed copies of a random fraction of records.

    Each selected record gets r copies, r drawn from a truncated Zipf, with
    names possibly shortened to a prefix and numerics jittered. Originals
    stay bit-identical; copies carry fresh ids and weight 1.0.
    """
    rng = np.random.default_rng(spec.seed)
    n = len(d)
    count = int(round(spec.duplication_rate * n))
    selected = sorted(int(i) for i in rng.choice(n, size=count, replace=False))
    pmf = zipf_pmf(spec.zipf_s, spec.max_copies)
    cdf = np.cumsum(pmf)
    clusters: dict[str, tuple[str, ...]] = {}
    copies: list[Record] = []
    for row in selected:
        orig = d.records[row]
        r = int(np.searchsorted(cdf, rng.random()) + 1)
        ids = []
        for c in range(r):
            names = {}
            for col, value in orig.names.items():
                if len(value) > spec.abbreviation_min and rng.random() < spec.abbreviation_prob:
                    cut = int(rng.integers(spec.abbreviation_min, len(value)))
                    names[col] = value[:cut]
                else:
                    names[col] = value
            numeric = {
                col: v + float(rng.uniform(-spec.numeric_jitter, spec.numeric_jitter))
                if spec.numeric_jitter > 0
                else v
                for col, v in orig.numeric.items()
            }
            cid = f"d:{orig.id}:{c}"
            ids.append(cid)
            copies.append(
                Record(
                    id=cid,
                    weight=1.0,
                    names=names,
                    numeric=numeric,
                    categorical=dict(orig.categorical),
                    group=orig.group,
                    label=orig.label,
                )
            )
        clusters[orig.id] = tuple(ids)
    out = d.replace_records((*d.records, *copies))
    return out, GroundTruth(duplicate_clusters=clusters)


def inject_poison(d: Dataset, spec: PoisonSpec) -> tuple[Dataset, GroundTruth]:
    """Append ceil(epsilon * n) out-of-range records with flipped labels.

    Every numeric feature of a poison record is pushed ``alpha`` population
    standard deviations beyond the clean minimum or maximum (direction
    random per record and feature); non-numeric fields are copied from a
    random clean record.
    """
    n = len(d)
    count = math.ceil(spec.epsilon * n)
    if count == 0:
        return d, GroundTruth()
    rng = np.random.default_rng(spec.seed)
    cols = d.schema.numeric_features
    values = {c: np.array([r.numeric[c] for r in d.records]) for c in cols}
    bounds = {
        c: (float(v.min()), float(v.max()), float(v.std())) for c, v in values.items()
    }
    ones = sum(r.label for r in d.records)
    majority = 1 if ones * 2 >= n else 0
    poison_label = 1 - majority
    poison: list[Record] = []
    for i in range(count):
        base = d.records[int(rng.integers(n))]
        numeric = {}
        for c in cols:
            lo, hi, std = bounds[c]
            if rng.random() < 0.5:
                numeric[c] = hi + spec.alpha * std
            else:
                numeric[c] = lo - spec.alpha * std
        poison.append(
            Record(
                id=f"p:{i}",
                weight=1.0,
                names=dict(base.names),
                numeric=numeric,
                categorical=dict(base.categorical),
                group=base.group,
                label=poison_label,
            )
        )
    out = d.replace_records((*d.records, *poison))
    return out, GroundTruth(poison_ids=frozenset(r.id for r in poison))


def impact(
    d: Dataset,
    ids,
    train_config: TrainConfig | None = None,
    split_seed: int = 0,
    test_fraction: float = 0.2,
) -> float:
    """Accuracy delta from dropping ``ids`` out of the training side.

    Positive means the model got better without them. Diagnostic only; no
    threshold separates honest noise from attack.
    """
    ids = set(ids)
    unknown = ids - set(d.ids())
    if unknown:
        raise ParameterError(f"unknown ids: {sorted(unknown)[:5]}")
    train_d, test_d = split_dataset(d, split_seed, test_fraction)
    eval_d = test_d if len(test_d) else train_d
    reduced = train_d.replace_records(r for r in train_d.records if r.id not in ids)
    if len({r.label for r in reduced.records}) < 2:
        raise MLCleanError("removing these ids empties a label class")
    with_model = train(train_d, train_config)
    without_model = train(reduced, train_config)
    return evaluate(without_model, eval_d).accuracy - evaluate(with_model, eval_d).accuracy


@dataclass(frozen=True)
class BenchRow:
    method: str
    status: str                      # "ok" or "FAILED: <reason>"
    accuracy: float | None
    fairness: float | None           # parity ratio; None if undefined/failed
    runtime_s: float | None
    pair_comparisons: int | None = None
    sanitize_precision: float | None = None
    sanitize_recall: float | None = None
    er_precision: float | None = None
    er_recall: float | None = None


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[BenchRow, ...]

    def row(self, method: str) -> BenchRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            [
                "method",
                "accuracy",
                "fairness",
                "runtime_s",
                "sanitize_precision",
                "sanitize_recall",
                "er_precision",
                "er_recall",
                "status",
            ]
        )
        for r in self.rows:
            writer.writerow(
                [
                    r.method,
                    _fmt(r.accuracy),
                    _fmt(r.fairness),
                    _fmt(r.runtime_s),
                    _fmt(r.sanitize_precision),
                    _fmt(r.sanitize_recall),
                    _fmt(r.er_precision),
                    _fmt(r.er_recall),
                    r.status,
                ]
            )
        return buf.getvalue()

    def to_text(self) -> str:
        header = f"{'Method':<12} {'Accuracy':>9} {'Fairness':>9} {'Runtime(s)':>11}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            acc = "n/a" if r.accuracy is None else f"{r.accuracy:.3f}"
            fair = "n/a" if r.fairness is None else f"{r.fairness:.3f}"
            rt = "n/a" if r.runtime_s is None else f"{r.runtime_s:.2f}"
            lines.append(f"{r.method:<12} {acc:>9} {fair:>9} {rt:>11}")
        return "\n".join(lines)


def _fmt(v):
    return "" if v is None else repr(v)


def _pairwise_scores(merge_entries, truth_pairs: set[frozenset[str]], eligible: set[str]):
    predicted: set[frozenset[str]] = set()
    for e in merge_entries:
        members = list(e.constituents)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                predicted.add(frozenset((members[i], members[j])))
    truth = {p for p in truth_pairs if p <= eligible}
    if not predicted and not truth:
        return 1.0, 1.0
    tp = len(predicted & truth)
    precision = tp / len(predicted) if predicted else 1.0
    recall = tp / len(truth) if truth else 1.0
    return precision, recall


def bench_orderings(
    d: Dataset,
    configs: list[PipelineConfig],
    labels: list[str],
    dup_spec: DuplicateSpec | None = None,
    poison_spec: PoisonSpec | None = None,
    split_seed: int = 0,
    test_fraction: float = 0.2,
    baseline_train: TrainConfig | None = None,
) -> ComparisonTable:
    """Run each pipeline config on identical splits and injected data.

    The clean dataset is split once; duplicates and poison are injected
    into the training side only. A "None" row (no preprocessing) always
    leads the table. A failing config becomes a FAILED row instead of
    aborting the benchmark.
    """
    if len(configs) != len(labels):
        raise ParameterError("configs and labels must align")
    if not configs:
        raise ParameterError("bench needs at least one config")
    clean_train, test_d = split_dataset(d, split_seed, test_fraction)
    truth = GroundTruth()
    train_d = clean_train
    if dup_spec is not None:
        train_d, dup_truth = inject_duplicates(train_d, dup_spec)
        truth = replace(truth, duplicate_clusters=dup_truth.duplicate_clusters)
    if poison_spec is not None:
        train_d, poison_truth = inject_poison(train_d, poison_spec)
        truth = replace(truth, poison_ids=poison_truth.poison_ids)
    eval_d = test_d if len(test_d) else clean_train
    truth_pairs = truth.duplicate_pairs()
    rows: list[BenchRow] = []

    def evaluate_config(method: str, cfg: PipelineConfig | None) -> BenchRow:
        start = time.perf_counter()
        try:
            if cfg is None:
                processed, stage_reports = train_d, []
                train_cfg = baseline_train or TrainConfig()
            else:
                processed, stage_reports = run_stages(train_d, cfg)
                train_cfg = cfg.train_config
            model = train(processed, train_cfg)
            metrics = evaluate(model, eval_d)
        except MLCleanError as exc:
            return BenchRow(
                method=method,
                status=f"FAILED: {exc}",
                accuracy=None,
                fairness=None,
                runtime_s=None,
            )
        runtime = time.perf_counter() - start
        sp = sr = ep = er = pairs = None
        for sr_report in stage_reports:
            if sr_report.stage == "S" and truth.poison_ids:
                flagged = sr_report.detail.flagged_ids()
                tp = len(flagged & truth.poison_ids)
                sp = tp / len(flagged) if flagged else 1.0
                sr = tp / len(truth.poison_ids)
            if sr_report.stage == "C":
                pairs = sr_report.pair_comparisons
                if truth.duplicate_clusters:
                    ep, er = _pairwise_scores(
                        sr_report.detail.entries, truth_pairs, set(train_d.ids())
                    )
        return BenchRow(
            method=method,
            status="ok",
            accuracy=metrics.accuracy,
            fairness=metrics.parity_ratio,
            runtime_s=runtime,
            pair_comparisons=pairs,
            sanitize_precision=sp,
            sanitize_recall=sr,
            er_precision=ep,
            er_recall=er,
        )

    rows.append(evaluate_config("None", None))
    for label, cfg in zip(labels, configs):
        rows.append(evaluate_config(label, cfg))
    return ComparisonTable(rows=tuple(rows))
