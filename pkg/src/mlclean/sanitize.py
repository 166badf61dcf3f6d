"""Clustering-based data sanitization.

k-means partitions the standardized feature space; records in undersized
clusters or unusually far from their centroid are flagged and removed. The
surviving cluster assignment doubles as a blocking structure for entity
resolution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, FeatureMatrix, default_cluster_count, featurize
from .errors import ParameterError

SMALL_CLUSTER = "SMALL_CLUSTER"
FAR_FROM_CENTROID = "FAR_FROM_CENTROID"


@dataclass(frozen=True)
class ClusterAssignment:
    """A partition of record ids into k clusters with centroids."""

    k: int
    assignment: dict[str, int]
    centroids: np.ndarray
    per_cluster_ids: tuple[tuple[str, ...], ...]
    inertia_history: tuple[float, ...] = ()

    def sizes(self) -> list[int]:
        return [len(ids) for ids in self.per_cluster_ids]


@dataclass(frozen=True)
class SanitizationPolicy:
    """When to flag a record.

    A record is flagged if its cluster has fewer than ``min_cluster_size``
    members, or if its distance to its centroid exceeds
    mean + tau * std of the intra-cluster distances.
    """

    min_cluster_size: int = 2
    tau: float = 2.5

    def __post_init__(self):
        if self.min_cluster_size < 1:
            raise ParameterError("min_cluster_size must be >= 1")
        if not self.tau > 0:
            raise ParameterError("tau must be positive")


@dataclass(frozen=True)
class Flagged:
    id: str
    reason: str
    distance: float
    cluster: int


@dataclass(frozen=True)
class SanitizationReport:
    flagged: tuple[Flagged, ...]
    surviving: ClusterAssignment

    def flagged_ids(self) -> set[str]:
        return {f.id for f in self.flagged}

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "reason", "distance", "cluster"])
            for f in self.flagged:
                writer.writerow([f.id, f.reason, repr(f.distance), f.cluster])


def _seed_centroids(X: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Farthest-point seeding: random first pick, then maximin."""
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(len(X)))]
    min_d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(min_d2))
        chosen.append(nxt)
        min_d2 = np.minimum(min_d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans(fm: FeatureMatrix, k: int, seed: int = 0, max_iter: int = 100) -> ClusterAssignment:
    """Lloyd's algorithm with deterministic farthest-point seeding.

    Converges when no assignment changes, or stops after ``max_iter``
    iterations. Identical (data, k, seed) always produce the identical
    partition.
    """
    X = fm.matrix
    n = len(X)
    if n == 0:
        raise ParameterError("cannot cluster an empty feature matrix")
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1")
    centers = _seed_centroids(X, k, seed)
    assign = np.full(n, -1)
    inertia_history: list[float] = []
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        # Empty-cluster repair: move the point farthest from its centroid.
        own = d2[np.arange(n), new_assign].copy()
        for c in range(k):
            if not np.any(new_assign == c):
                j = int(np.argmax(own))
                new_assign[j] = c
                own[j] = 0.0
        inertia_history.append(float(own.sum()))
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        centers = np.vstack([X[assign == c].mean(axis=0) for c in range(k)])
    per_cluster = tuple(
        tuple(fm.row_ids[i] for i in np.flatnonzero(assign == c)) for c in range(k)
    )
    return ClusterAssignment(
        k=k,
        assignment={fm.row_ids[i]: int(assign[i]) for i in range(n)},
        centroids=centers,
        per_cluster_ids=per_cluster,
        inertia_history=tuple(inertia_history),
    )


def detect_outliers(
    ca: ClusterAssignment, fm: FeatureMatrix, policy: SanitizationPolicy
) -> SanitizationReport:
    """Flag records by the small-cluster and far-from-centroid rules.

    Clusters of size one are judged by the size rule only. The surviving
    assignment drops flagged ids, recomputes centroids, and discards any
    cluster emptied by flagging.
    """
    index = {rid: i for i, rid in enumerate(fm.row_ids)}
    flagged: list[Flagged] = []
    survivors_per_cluster: list[list[str]] = []
    for c, ids in enumerate(ca.per_cluster_ids):
        if not ids:
            continue
        rows = np.array([index[rid] for rid in ids])
        dists = np.linalg.norm(fm.matrix[rows] - ca.centroids[c], axis=1)
        if len(ids) < policy.min_cluster_size:
            flagged.extend(
                Flagged(rid, SMALL_CLUSTER, float(dv), c) for rid, dv in zip(ids, dists)
            )
            survivors_per_cluster.append([])
            continue
        keep: list[str] = list(ids)
        if len(ids) >= 2:
            threshold = float(dists.mean() + policy.tau * dists.std())
            keep = []
            for rid, dv in zip(ids, dists):
                if dv > threshold:
                    flagged.append(Flagged(rid, FAR_FROM_CENTROID, float(dv), c))
                else:
                    keep.append(rid)
        survivors_per_cluster.append(keep)
    kept_clusters = [ids for ids in survivors_per_cluster if ids]
    centroids = []
    assignment: dict[str, int] = {}
    for new_c, ids in enumerate(kept_clusters):
        rows = np.array([index[rid] for rid in ids])
        centroids.append(fm.matrix[rows].mean(axis=0))
        for rid in ids:
            assignment[rid] = new_c
    surviving = ClusterAssignment(
        k=len(kept_clusters),
        assignment=assignment,
        centroids=np.array(centroids) if centroids else np.zeros((0, fm.width)),
        per_cluster_ids=tuple(tuple(ids) for ids in kept_clusters),
    )
    return SanitizationReport(flagged=tuple(flagged), surviving=surviving)


def sanitize(
    d: Dataset,
    k: int | None = None,
    seed: int = 0,
    policy: SanitizationPolicy | None = None,
    max_iter: int = 100,
) -> tuple[Dataset, SanitizationReport]:
    """Featurize, cluster, flag, and drop anomalous records.

    Pure filtering: surviving records keep their field values untouched.
    The report's surviving ClusterAssignment can feed entity resolution as
    a blocking structure.
    """
    policy = policy or SanitizationPolicy()
    if k is None:
        k = default_cluster_count(len(d))
    fm = featurize(d)
    ca = kmeans(fm, k, seed=seed, max_iter=max_iter)
    report = detect_outliers(ca, fm, policy)
    bad = report.flagged_ids()
    cleaned = d.replace_records(r for r in d.records if r.id not in bad)
    return cleaned, report
