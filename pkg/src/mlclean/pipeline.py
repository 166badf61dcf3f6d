"""Stage orchestration: sanitize (S), clean (C), reweigh (M).

Stages run in any configured order, or in fused mode where cleaning reuses
the sanitizer's surviving clusters as entity-resolution blocks. Every stage
records counts, weight deltas, pair-comparison counts, and wall-clock time.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import (
    DegenerateGroupError,
    InfeasibleStrategyError,
    ParameterError,
    StageError,
)
from .model import MetricsReport, TrainConfig, evaluate, train
from .resolve import MatchRules, MergeLog, MergePolicy, resolve
from .reweigh import ReweighReport, ReweighStrategy, reweigh
from .sanitize import SanitizationPolicy, SanitizationReport, sanitize

SEQUENCE = "SEQUENCE"
MLCLEAN = "MLCLEAN"
STAGES = ("S", "C", "M")


@dataclass(frozen=True)
class PipelineConfig:
    """Which stages to run, with what parameters, and how to evaluate.

    ``mode`` SEQUENCE runs ``stages`` left to right (C unblocked); MLCLEAN
    runs the fixed fused order: sanitize, then clean restricted to the
    sanitizer's surviving clusters, then reweigh. ``test_fraction`` 0 means
    no held-out split (evaluation happens on the processed training data).
    """

    mode: str = MLCLEAN
    stages: tuple[str, ...] = ()
    k: int | None = None
    kmeans_seed: int = 0
    sanitize_policy: SanitizationPolicy = field(default_factory=SanitizationPolicy)
    match_rules: MatchRules = field(default_factory=MatchRules)
    merge_policy: MergePolicy = field(default_factory=MergePolicy)
    reweigh_strategy: ReweighStrategy = field(default_factory=ReweighStrategy)
    train_config: TrainConfig = field(default_factory=TrainConfig)
    split_seed: int = 0
    test_fraction: float = 0.2
    sanitize_test: bool = False

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.mode not in (SEQUENCE, MLCLEAN):
            raise ParameterError(f"unknown pipeline mode {self.mode!r}")
        if self.mode == SEQUENCE:
            if not self.stages:
                raise ParameterError("a SEQUENCE pipeline needs at least one stage")
            if len(set(self.stages)) != len(self.stages):
                raise ParameterError("duplicate stages are forbidden")
            unknown = set(self.stages) - set(STAGES)
            if unknown:
                raise ParameterError(f"unknown stages: {sorted(unknown)}")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ParameterError("test_fraction must be in [0, 1)")


@dataclass(frozen=True)
class StageDelta:
    added_ids: tuple[str, ...]
    removed_ids: tuple[str, ...]
    weight_change: float

    @property
    def empty(self) -> bool:
        return not self.added_ids and not self.removed_ids and self.weight_change == 0.0


def stage_delta(before: Dataset, after: Dataset) -> StageDelta:
    """Id and total-weight differences between two dataset states."""
    before_ids = set(before.ids())
    after_ids = set(after.ids())
    return StageDelta(
        added_ids=tuple(sorted(after_ids - before_ids)),
        removed_ids=tuple(sorted(before_ids - after_ids)),
        weight_change=after.total_weight() - before.total_weight(),
    )


@dataclass(frozen=True)
class StageReport:
    stage: str
    input_count: int
    output_count: int
    delta: StageDelta
    seconds: float
    pair_comparisons: int | None = None
    detail: SanitizationReport | MergeLog | ReweighReport | None = None


@dataclass(frozen=True)
class PipelineReport:
    stages: tuple[StageReport, ...]
    metrics: MetricsReport | None
    total_seconds: float
    train_size: int
    test_size: int
    final_train_dataset: Dataset

    def stage(self, name: str) -> StageReport:
        for s in self.stages:
            if s.stage == name:
                return s
        raise KeyError(name)

    def to_text(self) -> str:
        lines = [
            f"{'stage':<6} {'in':>6} {'out':>6} {'dW':>12} {'pairs':>10} {'seconds':>10}"
        ]
        for s in self.stages:
            pairs = "" if s.pair_comparisons is None else str(s.pair_comparisons)
            lines.append(
                f"{s.stage:<6} {s.input_count:>6} {s.output_count:>6} "
                f"{s.delta.weight_change:>12.6g} {pairs:>10} {s.seconds:>10.4f}"
            )
        if self.metrics is not None:
            parity = (
                "UNDEFINED"
                if self.metrics.parity_ratio is None
                else f"{self.metrics.parity_ratio:.6f}"
            )
            lines.append(
                f"accuracy={self.metrics.accuracy:.6f} parity_ratio={parity} "
                f"total_seconds={self.total_seconds:.4f}"
            )
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["stage", "input", "output", "weight_change", "pair_comparisons", "seconds"]
        )
        for s in self.stages:
            writer.writerow(
                [
                    s.stage,
                    s.input_count,
                    s.output_count,
                    repr(s.delta.weight_change),
                    "" if s.pair_comparisons is None else s.pair_comparisons,
                    repr(s.seconds),
                ]
            )
        return buf.getvalue()


def split_dataset(d: Dataset, seed: int, test_fraction: float) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled train/test split; original order preserved
    within each side."""
    n = len(d)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_test = int(round(test_fraction * n))
    test_rows = set(int(i) for i in perm[:n_test])
    train = d.replace_records(r for i, r in enumerate(d.records) if i not in test_rows)
    test = d.replace_records(r for i, r in enumerate(d.records) if i in test_rows)
    return train, test


def run_stages(d: Dataset, cfg: PipelineConfig) -> tuple[Dataset, list[StageReport]]:
    """Apply the configured preprocessing stages to one dataset."""
    reports: list[StageReport] = []
    current = d
    blocks = None

    def record(stage, before, after, seconds, pairs=None, detail=None):
        reports.append(
            StageReport(
                stage=stage,
                input_count=len(before),
                output_count=len(after),
                delta=stage_delta(before, after),
                seconds=seconds,
                pair_comparisons=pairs,
                detail=detail,
            )
        )

    stages = ("S", "C", "M") if cfg.mode == MLCLEAN else cfg.stages
    fused = cfg.mode == MLCLEAN
    for stage in stages:
        before = current
        start = time.perf_counter()
        try:
            if stage == "S":
                current, san_report = sanitize(
                    current, k=cfg.k, seed=cfg.kmeans_seed, policy=cfg.sanitize_policy
                )
                if fused:
                    blocks = san_report.surviving
                record(
                    "S", before, current, time.perf_counter() - start, detail=san_report
                )
            elif stage == "C":
                current, log = resolve(
                    current,
                    blocks=blocks if fused else None,
                    rules=cfg.match_rules,
                    policy=cfg.merge_policy,
                )
                record(
                    "C",
                    before,
                    current,
                    time.perf_counter() - start,
                    pairs=log.comparisons,
                    detail=log,
                )
            else:
                current, rw_report = reweigh(current, cfg.reweigh_strategy)
                record(
                    "M", before, current, time.perf_counter() - start, detail=rw_report
                )
        except (DegenerateGroupError, InfeasibleStrategyError, ParameterError) as exc:
            raise StageError(stage, str(exc)) from exc
    return current, reports


def run_pipeline(d: Dataset, cfg: PipelineConfig) -> PipelineReport:
    """Split, preprocess the training side, train, and evaluate.

    The held-out side is never preprocessed unless ``sanitize_test`` asks
    for test-side sanitization. With ``test_fraction`` 0 the model is
    evaluated on the processed training data.
    """
    if len(d) == 0:
        raise ParameterError("cannot run a pipeline on an empty dataset")
    start = time.perf_counter()
    train_d, test_d = split_dataset(d, cfg.split_seed, cfg.test_fraction)
    if cfg.sanitize_test and len(test_d):
        test_d, _ = sanitize(
            test_d, k=cfg.k, seed=cfg.kmeans_seed, policy=cfg.sanitize_policy
        )
    processed, reports = run_stages(train_d, cfg)
    model = train(processed, cfg.train_config)
    eval_d = test_d if len(test_d) else processed
    metrics = evaluate(model, eval_d)
    return PipelineReport(
        stages=tuple(reports),
        metrics=metrics,
        total_seconds=time.perf_counter() - start,
        train_size=len(train_d),
        test_size=len(test_d),
        final_train_dataset=processed,
    )
