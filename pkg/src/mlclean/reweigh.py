"""Unfairness mitigation by example reweighing.

Rescales per-record weights so the weighted positive-label ratio is equal
across the two sensitive groups (demographic parity on the data). The
reference is always the group with the larger ratio; one strategy raises
the other group's positive weights, the other lowers its negative weights.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

from .dataset import Dataset
from .errors import DegenerateGroupError, InfeasibleStrategyError, ParameterError

UPWEIGHT_POSITIVES = "UPWEIGHT_POSITIVES"
DOWNWEIGHT_NEGATIVES = "DOWNWEIGHT_NEGATIVES"

_RATIO_TIE_EPS = 1e-12


@dataclass(frozen=True)
class GroupStats:
    """Weighted positive/negative label mass per sensitive group."""

    positive: dict[str, float]
    negative: dict[str, float]

    def ratio(self, group: str) -> float:
        p, n = self.positive[group], self.negative[group]
        return p / (p + n)

    def ratios(self) -> dict[str, float]:
        return {g: self.ratio(g) for g in self.positive}


@dataclass(frozen=True)
class ReweighStrategy:
    mode: str = DOWNWEIGHT_NEGATIVES

    def __post_init__(self):
        if self.mode not in (UPWEIGHT_POSITIVES, DOWNWEIGHT_NEGATIVES):
            raise ParameterError(f"unknown reweigh mode {self.mode!r}")


@dataclass(frozen=True)
class ReweighReport:
    old_weights: dict[str, float]
    new_weights: dict[str, float]
    ratios_before: dict[str, float]
    ratios_after: dict[str, float]
    factors: dict[str, float]

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "old_weight", "new_weight"])
            for rid in self.old_weights:
                writer.writerow(
                    [rid, repr(self.old_weights[rid]), repr(self.new_weights[rid])]
                )
            writer.writerow([])
            writer.writerow(["group", "ratio_before", "ratio_after"])
            for g in self.ratios_before:
                writer.writerow(
                    [g, repr(self.ratios_before[g]), repr(self.ratios_after[g])]
                )


def group_stats(d: Dataset) -> GroupStats:
    """Weighted label-1 and label-0 mass for each sensitive group.

    Raises if a group carries zero total weight, since its ratio is then
    undefined.
    """
    groups = d.schema.sensitive_groups
    positive = {g: 0.0 for g in groups}
    negative = {g: 0.0 for g in groups}
    for r in d.records:
        if r.label == 1:
            positive[r.group] += r.weight
        else:
            negative[r.group] += r.weight
    for g in groups:
        if positive[g] + negative[g] <= 0:
            raise DegenerateGroupError(f"group {g!r} has zero total weight")
    return GroupStats(positive=positive, negative=negative)


def _reference_group(stats: GroupStats, groups: tuple[str, str]) -> str:
    # argmax ratio, ties toward the schema's first group.
    best = groups[0]
    for g in groups[1:]:
        if stats.ratio(g) > stats.ratio(best):
            best = g
    return best


def reweigh(
    d: Dataset, strategy: ReweighStrategy | None = None
) -> tuple[Dataset, ReweighReport]:
    """Equalize weighted positive-label ratios across the two groups.

    Only the targeted label side of non-reference groups changes. Scale
    factors use the odds form (P_ref * N_g) / (N_ref * P_g), which stays
    exact for rational weights and keeps the op idempotent. Groups
    whose ratio already equals the reference get factor exactly 1.0.
    """
    strategy = strategy or ReweighStrategy()
    stats = group_stats(d)
    groups = d.schema.sensitive_groups
    ref = _reference_group(stats, groups)
    p_ref, n_ref = stats.positive[ref], stats.negative[ref]
    factors: dict[str, float] = {}
    for g in groups:
        if g == ref or abs(stats.ratio(g) - stats.ratio(ref)) < _RATIO_TIE_EPS:
            factors[g] = 1.0
            continue
        p_g, n_g = stats.positive[g], stats.negative[g]
        if n_ref <= 0:
            raise InfeasibleStrategyError(
                f"reference group {ref!r} has ratio 1; group {g!r} cannot"
                " match it by rescaling"
            )
        if p_g <= 0:
            raise InfeasibleStrategyError(
                f"group {g!r} has no positive weight; its ratio cannot be"
                " raised by rescaling"
            )
        if strategy.mode == UPWEIGHT_POSITIVES:
            factors[g] = (p_ref * n_g) / (n_ref * p_g)
        else:
            factors[g] = (n_ref * p_g) / (p_ref * n_g)
    target_label = 1 if strategy.mode == UPWEIGHT_POSITIVES else 0
    old_weights = {r.id: r.weight for r in d.records}
    records = []
    for r in d.records:
        f = factors[r.group]
        if r.label == target_label and f != 1.0:
            records.append(replace(r, weight=r.weight * f))
        else:
            records.append(r)
    out = d.replace_records(records)
    report = ReweighReport(
        old_weights=old_weights,
        new_weights={r.id: r.weight for r in out.records},
        ratios_before=stats.ratios(),
        ratios_after=group_stats(out).ratios(),
        factors=factors,
    )
    return out, report
