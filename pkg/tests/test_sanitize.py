import itertools

import numpy as np
import pytest

from mlclean import (
    FAR_FROM_CENTROID,
    SMALL_CLUSTER,
    FeatureMatrix,
    ParameterError,
    SanitizationPolicy,
    detect_outliers,
    featurize,
    kmeans,
    sanitize,
)


def matrix_of(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return FeatureMatrix(
        row_ids=tuple(f"r{i}" for i in range(len(pts))),
        columns=tuple(f"x{j}" for j in range(pts.shape[1])),
        matrix=pts,
        stats={},
        categories={},
    )


def best_two_partition(X):
    """Oracle: exhaustive enumeration of all 2-partitions minimizing WCSS."""
    n = len(X)
    best, best_cost = None, np.inf
    for bits in itertools.product([0, 1], repeat=n - 1):
        assign = np.array([0, *bits])
        if len(set(assign)) < 2:
            continue
        cost = sum(
            ((X[assign == c] - X[assign == c].mean(axis=0)) ** 2).sum()
            for c in (0, 1)
        )
        if cost < best_cost:
            best, best_cost = assign, cost
    groups = frozenset(
        frozenset(np.flatnonzero(best == c).tolist()) for c in (0, 1)
    )
    return groups, best_cost


class TestKMeans:
    def test_running_example_isolates_the_anomaly(self, example):
        fm = featurize(example)
        optimal, _ = best_two_partition(fm.matrix)
        assert frozenset({frozenset({0, 1, 2, 3, 4}), frozenset({5})}) == optimal
        ca = kmeans(fm, 2, seed=0)
        got = frozenset(
            frozenset(fm.row_ids.index(r) for r in ids) for ids in ca.per_cluster_ids
        )
        assert got == optimal

    def test_matches_enumeration_oracle_on_random_data(self):
        rng = np.random.default_rng(3)
        X = np.vstack([rng.normal(-3, 0.5, (5, 2)), rng.normal(3, 0.5, (5, 2))])
        optimal, opt_cost = best_two_partition(X)
        ca = kmeans(matrix_of(X), 2, seed=0)
        got = frozenset(frozenset(int(i[1:]) for i in ids) for ids in ca.per_cluster_ids)
        assert got == optimal
        assert ca.inertia_history[-1] == pytest.approx(opt_cost)

    def test_k_one_puts_everything_together(self, example):
        ca = kmeans(featurize(example), 1, seed=0)
        assert ca.sizes() == [6]

    def test_k_equals_n_gives_singletons_and_zero_inertia(self):
        X = np.arange(5, dtype=float)
        ca = kmeans(matrix_of(X), 5, seed=0)
        assert sorted(ca.sizes()) == [1] * 5
        assert ca.inertia_history[-1] == 0.0

    def test_inertia_never_increases(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(60, 3))
        for seed in range(5):
            ca = kmeans(matrix_of(X), 4, seed=seed)
            hist = ca.inertia_history
            assert all(a >= b - 1e-9 for a, b in zip(hist, hist[1:]))

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 2))
        a = kmeans(matrix_of(X), 3, seed=9)
        b = kmeans(matrix_of(X), 3, seed=9)
        assert a.per_cluster_ids == b.per_cluster_ids
        assert np.array_equal(a.centroids, b.centroids)

    def test_parameter_errors(self, example):
        fm = featurize(example)
        with pytest.raises(ParameterError):
            kmeans(fm, 7, seed=0)
        with pytest.raises(ParameterError):
            kmeans(fm, 0, seed=0)


class TestDetectOutliers:
    def test_singleton_cluster_flagged_small(self, example):
        fm = featurize(example)
        ca = kmeans(fm, 2, seed=0)
        report = detect_outliers(ca, fm, SanitizationPolicy(min_cluster_size=2))
        assert report.flagged_ids() == {"e6"}
        assert report.flagged[0].reason == SMALL_CLUSTER

    def test_identical_points_flag_nothing(self):
        fm = matrix_of([[1.0, 2.0]] * 6)
        ca = kmeans(fm, 1, seed=0)
        report = detect_outliers(ca, fm, SanitizationPolicy())
        assert report.flagged_ids() == set()

    def test_far_point_flagged_by_distance_rule(self):
        # Oracle: mean/std of the five centroid distances, computed directly.
        points = [0.0, 0.0, 0.0, 0.0, 10.0]
        fm = matrix_of(points)
        ca = kmeans(fm, 1, seed=0)
        dists = np.abs(np.array(points) - np.mean(points))
        threshold = dists.mean() + 1.0 * dists.std()
        assert dists[4] > threshold and all(d <= threshold for d in dists[:4])
        report = detect_outliers(ca, fm, SanitizationPolicy(min_cluster_size=1, tau=1.0))
        assert report.flagged_ids() == {"r4"}
        assert report.flagged[0].reason == FAR_FROM_CENTROID

    def test_partition_between_flagged_and_surviving(self):
        rng = np.random.default_rng(2)
        fm = matrix_of(rng.normal(size=(30, 2)))
        ca = kmeans(fm, 3, seed=1)
        report = detect_outliers(ca, fm, SanitizationPolicy(min_cluster_size=4, tau=1.5))
        surviving = set(report.surviving.assignment)
        assert surviving | report.flagged_ids() == set(fm.row_ids)
        assert not surviving & report.flagged_ids()


class TestSanitize:
    def test_removes_anomaly_from_running_example(self, example):
        cleaned, report = sanitize(example, k=2, seed=0)
        assert cleaned.ids() == ["e1", "e2", "e3", "e4", "e5"]
        assert report.flagged_ids() == {"e6"}

    def test_lenient_policy_changes_nothing(self, example):
        policy = SanitizationPolicy(min_cluster_size=1, tau=1e18)
        cleaned, report = sanitize(example, k=2, seed=0, policy=policy)
        assert cleaned == example
        assert report.flagged == ()

    def test_pure_filtering_keeps_survivor_fields(self, example):
        cleaned, _ = sanitize(example, k=2, seed=0)
        for r in cleaned.records:
            assert r == example.by_id(r.id)

    def test_determinism_bit_for_bit(self, example):
        a = sanitize(example, k=2, seed=3)
        b = sanitize(example, k=2, seed=3)
        assert a[0] == b[0]
        assert a[1].flagged == b[1].flagged

    def test_report_csv(self, tmp_path, example):
        _, report = sanitize(example, k=2, seed=0)
        path = tmp_path / "report.csv"
        report.save_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "id,reason,distance,cluster"
        assert lines[1].startswith("e6,SMALL_CLUSTER,")
