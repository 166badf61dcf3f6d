"""Entity resolution: pairwise matching, transitive merging, merge log.

Matching can run over all record pairs or be restricted to blocks (e.g.
sanitization clusters). Matched pairs are closed transitively with a
union-find structure and each connected component is merged into a single
record under a configurable merge policy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, Record
from .errors import ParameterError
from .sanitize import ClusterAssignment

SUM_WEIGHTS = "SUM_WEIGHTS"
KEEP_ONE = "KEEP_ONE"


@dataclass(frozen=True)
class MatchRules:
    """When two records refer to the same entity.

    Names match if equal or one abbreviates the other with at least
    ``min_prefix`` characters (so "Joe" matches "Joseph"). Numeric features
    must agree within ``numeric_tolerance`` (a scalar for all features or a
    per-feature dict). By default records from different sensitive groups
    never match.
    """

    min_prefix: int = 3
    numeric_tolerance: float | dict[str, float] = 0.0
    require_same_group: bool = True

    def __post_init__(self):
        if self.min_prefix < 1:
            raise ParameterError("min_prefix must be >= 1")
        tols = (
            self.numeric_tolerance.values()
            if isinstance(self.numeric_tolerance, dict)
            else [self.numeric_tolerance]
        )
        if any(t < 0 for t in tols):
            raise ParameterError("numeric tolerances must be >= 0")

    def tolerance(self, column: str) -> float:
        if isinstance(self.numeric_tolerance, dict):
            return self.numeric_tolerance.get(column, 0.0)
        return self.numeric_tolerance


@dataclass(frozen=True)
class MergePolicy:
    """How to collapse a matched component into one record.

    weight_mode SUM_WEIGHTS conserves total weight; KEEP_ONE keeps the
    weight of the constituent with the smallest id. Labels are decided by
    weighted majority with ties broken toward the lexicographically
    smallest constituent id; names take the longest string; numerics the
    weighted mean.
    """

    weight_mode: str = SUM_WEIGHTS

    def __post_init__(self):
        if self.weight_mode not in (SUM_WEIGHTS, KEEP_ONE):
            raise ParameterError(f"unknown weight_mode {self.weight_mode!r}")


@dataclass(frozen=True)
class MergeEntry:
    merged_id: str
    constituents: tuple[str, ...]
    weight: float
    label: int


@dataclass(frozen=True)
class MergeLog:
    entries: tuple[MergeEntry, ...]
    comparisons: int

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["merged_id", "constituents", "weight", "label"])
            for e in self.entries:
                writer.writerow(
                    [e.merged_id, ";".join(e.constituents), repr(e.weight), e.label]
                )


class UnionFind:
    """Disjoint sets over record ids with path compression."""

    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Keep the smaller id as the root for determinism.
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def components(self) -> dict[str, list[str]]:
        comps: dict[str, list[str]] = {}
        for x in self.parent:
            comps.setdefault(self.find(x), []).append(x)
        return comps


def _names_match(a: str, b: str, min_prefix: int) -> bool:
    """Equal, or the shorter is an abbreviation of the longer.

    Abbreviation: at least ``min_prefix`` characters, same first character,
    and an in-order subsequence of the longer string. Covers both prefix
    truncations ("Jos" / "Joseph") and elisions ("Joe" / "Joseph").
    """
    if a == b:
        return True
    shorter, longer = (a, b) if len(a) <= len(b) else (b, a)
    if len(shorter) < min_prefix or len(shorter) == len(longer):
        return False
    if not shorter or shorter[0] != longer[0]:
        return False
    it = iter(longer)
    return all(ch in it for ch in shorter)


def match_pair(a: Record, b: Record, rules: MatchRules) -> bool:
    """True iff every name column, numeric feature, and (optionally) the
    sensitive group agree under the rules. Symmetric in its arguments."""
    if rules.require_same_group and a.group != b.group:
        return False
    for col, av in a.numeric.items():
        if abs(av - b.numeric[col]) > rules.tolerance(col):
            return False
    for col, an in a.names.items():
        if not _names_match(an, b.names[col], rules.min_prefix):
            return False
    return True


def pair_count(n_records: int, blocks: ClusterAssignment | None = None) -> int:
    """Number of pairwise comparisons: n(n-1)/2, or the per-block sum."""
    if blocks is None:
        return n_records * (n_records - 1) // 2
    return sum(len(ids) * (len(ids) - 1) // 2 for ids in blocks.per_cluster_ids)


def _matching_pairs(d: Dataset, rows: list[int], rules: MatchRules):
    """All matching index pairs within ``rows``, via a vectorized prefilter.

    Cheap numeric/group screening runs over numpy arrays; the name rule is
    only evaluated on surviving candidates. Equivalent to brute-force
    match_pair over all pairs.
    """
    records = d.records
    ncols = d.schema.numeric_features
    numeric = np.array(
        [[records[i].numeric[c] for c in ncols] for i in rows]
    ) if ncols else np.zeros((len(rows), 0))
    groups = np.array([records[i].group for i in rows])
    tols = np.array([rules.tolerance(c) for c in ncols])
    m = len(rows)
    for a in range(m - 1):
        mask = np.ones(m - a - 1, dtype=bool)
        if rules.require_same_group:
            mask &= groups[a + 1 :] == groups[a]
        if ncols:
            mask &= (np.abs(numeric[a + 1 :] - numeric[a]) <= tols).all(axis=1)
        for off in np.flatnonzero(mask):
            b = a + 1 + int(off)
            ra, rb = records[rows[a]], records[rows[b]]
            if all(
                _names_match(ra.names[c], rb.names[c], rules.min_prefix)
                for c in d.schema.name_columns
            ):
                yield rows[a], rows[b]


def _merge_component(
    d: Dataset, member_rows: list[int], policy: MergePolicy
) -> tuple[Record, MergeEntry]:
    records = [d.records[i] for i in member_rows]
    records.sort(key=lambda r: r.id)
    ids = [r.id for r in records]
    total_w = sum(r.weight for r in records)
    weight = total_w if policy.weight_mode == SUM_WEIGHTS else records[0].weight
    # Weighted majority label; ties go to the smallest id's label.
    mass = {0: 0.0, 1: 0.0}
    for r in records:
        mass[r.label] += r.weight
    if mass[0] == mass[1]:
        label = records[0].label
    else:
        label = 1 if mass[1] > mass[0] else 0

    def majority(values: list[str]) -> str:
        acc: dict[str, float] = {}
        for r, v in zip(records, values):
            acc[v] = acc.get(v, 0.0) + r.weight
        best = max(acc.values())
        for v in values:  # first in smallest-id order wins ties
            if acc[v] == best:
                return v
        raise AssertionError

    names = {}
    for col in d.schema.name_columns:
        longest = max(len(r.names[col]) for r in records)
        names[col] = min(r.names[col] for r in records if len(r.names[col]) == longest)
    numeric = {}
    for col in d.schema.numeric_features:
        if total_w > 0:
            numeric[col] = sum(r.weight * r.numeric[col] for r in records) / total_w
        else:
            numeric[col] = records[0].numeric[col]
    categorical = {
        col: majority([r.categorical[col] for r in records])
        for col in d.schema.categorical_features
    }
    group = majority([r.group for r in records])
    merged_id = "m:" + "+".join(ids)
    merged = Record(
        id=merged_id,
        weight=weight,
        names=names,
        numeric=numeric,
        categorical=categorical,
        group=group,
        label=label,
        provenance=frozenset().union(*(r.provenance for r in records)),
    )
    return merged, MergeEntry(merged_id, tuple(ids), weight, label)


def resolve(
    d: Dataset,
    blocks: ClusterAssignment | None = None,
    rules: MatchRules | None = None,
    policy: MergePolicy | None = None,
) -> tuple[Dataset, MergeLog]:
    """Merge duplicate records by transitive closure of pairwise matches.

    With ``blocks`` given, comparisons run within each block only; the
    blocks must cover exactly the dataset's ids. Output order follows the
    smallest original position of each merged component.
    """
    rules = rules or MatchRules()
    policy = policy or MergePolicy()
    position = {r.id: i for i, r in enumerate(d.records)}
    if blocks is not None:
        block_ids = set(blocks.assignment)
        if block_ids != set(position):
            raise ParameterError("blocks must cover exactly the dataset's ids")
    uf = UnionFind(d.ids())
    if blocks is None:
        row_groups = [list(range(len(d)))]
    else:
        row_groups = [
            sorted(position[rid] for rid in ids) for ids in blocks.per_cluster_ids
        ]
    for rows in row_groups:
        for i, j in _matching_pairs(d, rows, rules):
            uf.union(d.records[i].id, d.records[j].id)
    components = uf.components()
    out: list[tuple[int, Record]] = []
    entries: list[MergeEntry] = []
    for members in components.values():
        rows = sorted(position[rid] for rid in members)
        if len(rows) == 1:
            out.append((rows[0], d.records[rows[0]]))
            continue
        merged, entry = _merge_component(d, rows, policy)
        out.append((rows[0], merged))
        entries.append(entry)
    out.sort(key=lambda t: t[0])
    entries.sort(key=lambda e: e.constituents)
    n_blocks = blocks if blocks is not None else None
    log = MergeLog(entries=tuple(entries), comparisons=pair_count(len(d), n_blocks))
    return d.replace_records(r for _, r in out), log
