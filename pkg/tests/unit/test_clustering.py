# tests/unit/test_clustering.py
# ------------------------------------------------------------
# Purpose: ET / PT thresholds, local gravitation clustering, the
#          k-means + elbow baseline and CM / AE / ECM metrics
#          (src/clustering/).
# ------------------------------------------------------------

import numpy as np
import pytest
from sklearn.datasets import make_moons

from src.clustering.kmeans_elbow import elbow_choice, kmeans_elbow
from src.clustering.lgc import lgc_cluster
from src.clustering.metrics import (
    clustering_metric,
    cluster_count_error,
    ecm,
    mae_over_trials,
)
from src.clustering.thresholds import energy_threshold, nearest_rank_percentile, percentile_threshold
from src.clustering.types import NOISE, ClusterDataset, Clustering


def _blobs(rng, centers, per_blob=50, sigma=1.0):
    points = np.vstack([rng.normal(c, sigma, size=(per_blob, 2)) for c in centers])
    truth = np.repeat(np.arange(len(centers)), per_blob)
    return ClusterDataset.from_points(points), truth


def _clusters_are_pure(labels, truth):
    """No detected cluster holds points from two ground-truth groups."""
    for lab in set(labels) - {NOISE}:
        if len(set(truth[labels == lab])) != 1:
            return False
    return True


# -----------------------
# Thresholds
# -----------------------

def test_energy_threshold_is_strict():
    assert len(energy_threshold(np.ones((4, 4)))) == 0

    G = np.zeros((4, 4))
    G[1, 2] = 10.0
    data = energy_threshold(G)
    assert data.points.tolist() == [[1.0, 2.0]]
    assert data.weights.tolist() == [10.0]
    assert not data.degenerate


def test_energy_threshold_flags_all_zero_matrix():
    data = energy_threshold(np.zeros((3, 5)))
    assert len(data) == 0 and data.degenerate


def test_percentile_threshold_counts(rng):
    G = rng.permutation(128 * 128).reshape(128, 128).astype(float)
    assert len(percentile_threshold(G, 95)) == 819

    values = np.arange(1, 101, dtype=float).reshape(10, 10)
    kept = percentile_threshold(values, 50)
    assert sorted(kept.weights.tolist()) == list(range(51, 101))
    assert nearest_rank_percentile(values, 50) == 50.0


def test_percentile_threshold_is_monotone_in_alpha(rng):
    G = np.abs(rng.standard_normal((32, 32)))
    strict = {tuple(p) for p in percentile_threshold(G, 97).points}
    loose = {tuple(p) for p in percentile_threshold(G, 95).points}
    assert strict <= loose


def test_percentile_threshold_edge_cases():
    data = percentile_threshold(np.full((4, 4), 2.0), 95)
    assert len(data) == 0 and data.degenerate
    for alpha in (0, 100, 150):
        with pytest.raises(ValueError, match="percentile"):
            percentile_threshold(np.ones((2, 2)), alpha)


# -----------------------
# Local gravitation clustering
# -----------------------

def test_lgc_separates_two_blobs(rng):
    data, truth = _blobs(rng, [(0, 0), (20, 0)])
    result = lgc_cluster(data, k_neighbors=8)
    assert result.L_hat == 2
    assert _clusters_are_pure(result.labels, truth)


def test_lgc_single_blob(rng):
    data, _ = _blobs(rng, [(5, 5)], per_blob=60)
    assert lgc_cluster(data, k_neighbors=8).L_hat == 1


def test_lgc_plus_shapes_match_nearest_center_oracle():
    plus = np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
    points = np.vstack([plus, plus + [10, 10]])
    result, diag = lgc_cluster(ClusterDataset.from_points(points), k_neighbors=3, return_diagnostics=True)

    assert result.L_hat == 2
    assert result.labels.tolist() == [0] * 5 + [1] * 5
    assert diag.centers[0] and diag.centers[5]
    assert diag.r0 == pytest.approx(2 * np.sqrt(2))


def test_lgc_is_translation_invariant_and_deterministic(rng):
    data, _ = _blobs(rng, [(0, 0), (15, 8), (-6, 20)], per_blob=30)
    points = np.rint(data.points * 3)  # integer grid so shifted distances are bit-identical
    base = lgc_cluster(ClusterDataset.from_points(points))
    shifted = lgc_cluster(ClusterDataset.from_points(points + [7, -4]))
    again = lgc_cluster(ClusterDataset.from_points(points))
    assert np.array_equal(base.labels, shifted.labels)
    assert np.array_equal(base.labels, again.labels)


def test_lgc_small_dataset_fallback():
    points = np.array([[3, 3], [3, 4], [10, 1]], dtype=float)
    result = lgc_cluster(ClusterDataset.from_points(points), k_neighbors=8)
    assert result.fallback
    assert result.L_hat == 2
    assert result.labels.tolist() == [0, 0, 1]
    assert lgc_cluster(ClusterDataset.from_points(np.zeros((0, 2)))).L_hat == 0


def test_lgc_small_dataset_fallback_keeps_separate_groups_apart():
    # at most k points: grid-adjacent components, flagged
    points = np.array([[0, 0], [0, 1], [5, 5], [5, 6], [12, 2]], dtype=float)
    result = lgc_cluster(ClusterDataset.from_points(points), k_neighbors=8)
    assert result.fallback
    assert result.L_hat == 3
    assert result.labels.tolist() == [0, 0, 1, 1, 2]

    diagonal = np.array([[3, 3], [4, 4], [5, 5]], dtype=float)
    assert lgc_cluster(ClusterDataset.from_points(diagonal), k_neighbors=8).L_hat == 1


def test_lgc_needs_at_least_three_neighbors():
    data = ClusterDataset.from_points(np.arange(20, dtype=float).reshape(10, 2))
    for k in (0, 2):
        with pytest.raises(ValueError, match="k_neighbors"):
            lgc_cluster(data, k_neighbors=k)


def test_lgc_merge_only_unites_clusters(rng):
    data, _ = _blobs(rng, [(0, 0), (9, 0), (30, 30)], per_blob=40, sigma=1.5)
    merged = lgc_cluster(data, k_neighbors=8)
    unmerged = lgc_cluster(data, k_neighbors=8, merge_linked=False)
    assert merged.L_hat <= unmerged.L_hat
    assert np.array_equal(merged.labels == NOISE, unmerged.labels == NOISE)
    # every unmerged cluster lies inside one merged cluster
    for support in unmerged.supports:
        assert len(set(merged.labels[support])) == 1


def test_lgc_follows_non_spherical_moons_where_kmeans_mixes_them():
    X, truth = make_moons(n_samples=200, noise=0.05, random_state=0)
    data = ClusterDataset.from_points(X * 10)

    lgc = lgc_cluster(data, k_neighbors=8)
    assert lgc.L_hat == 2
    assert _clusters_are_pure(lgc.labels, truth)

    km = kmeans_elbow(data, K_max=2)
    assert km.L_hat == 2
    assert not _clusters_are_pure(km.labels, truth)


# -----------------------
# k-means + elbow
# -----------------------

def test_kmeans_elbow_picks_two_blobs(rng):
    data, truth = _blobs(rng, [(0, 0), (25, 5)], per_blob=40)
    result, wcss = kmeans_elbow(data, K_max=8, return_wcss=True)
    assert result.L_hat == 2
    assert _clusters_are_pure(result.labels, truth)
    assert len(wcss) == 8


def test_kmeans_elbow_on_repeated_point():
    data = ClusterDataset.from_points(np.tile([4.0, 7.0], (12, 1)))
    assert kmeans_elbow(data, K_max=8).L_hat == 1


def test_elbow_choice_examples():
    assert elbow_choice(np.array([100.0, 10.0, 8.0, 7.0])) == 2
    assert elbow_choice(np.array([100.0, 90.0, 10.0, 9.0])) == 3
    assert elbow_choice(np.zeros(4)) == 1


def test_kmeans_is_seeded(rng):
    data, _ = _blobs(rng, [(0, 0), (8, 0), (4, 7)], per_blob=20, sigma=1.5)
    a = kmeans_elbow(data, K_max=6, seed=3)
    b = kmeans_elbow(data, K_max=6, seed=3)
    assert np.array_equal(a.labels, b.labels)
    with pytest.raises(ValueError):
        kmeans_elbow(data, K_max=1)


# -----------------------
# Metrics
# -----------------------

def test_clustering_metric_examples():
    pair = np.array([[0, 0], [2, 0]], dtype=float)
    assert clustering_metric(Clustering.from_labels([0, 0], pair)) == pytest.approx(1.0)

    two = np.vstack([pair, pair + [10, 10]])
    assert clustering_metric(Clustering.from_labels([0, 0, 1, 1], two)) == pytest.approx(1.0)

    singleton = np.array([[0, 0], [2, 0], [9, 9]], dtype=float)
    assert clustering_metric(Clustering.from_labels([0, 0, 1], singleton)) == pytest.approx(0.5)
    assert np.isnan(clustering_metric(Clustering.empty()))


def test_metrics_ignore_label_permutations(rng):
    points = rng.integers(0, 30, size=(20, 2)).astype(float)
    labels = rng.integers(0, 3, size=20)
    permuted = np.array([2, 0, 1])[labels]
    assert clustering_metric(Clustering.from_labels(labels, points)) == pytest.approx(
        clustering_metric(Clustering.from_labels(permuted, points)))
    assert np.array_equal(Clustering.from_labels(labels, points).labels,
                          Clustering.from_labels(permuted, points).labels)


def test_count_error_and_mae():
    assert cluster_count_error(5, 4) == 1
    assert cluster_count_error(4, 4) == 0
    assert cluster_count_error(0, 3) == 3
    with pytest.raises(ValueError):
        cluster_count_error(2, 0)
    assert mae_over_trials([0, 1, 2, 1]) == 1.0
    assert np.isnan(mae_over_trials([]))


def test_ecm_examples():
    assert ecm([0], [10.0]) == pytest.approx(1.0)
    assert ecm([1], [100.0]) == pytest.approx(4.0)
    # a trial without clusters is skipped
    assert ecm([0, 3], [10.0, np.nan]) == pytest.approx(1.0)
    assert np.isnan(ecm([2], [np.nan]))
    with pytest.raises(ValueError):
        ecm([0, 1], [10.0])
