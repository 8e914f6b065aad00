# =========================================
# 📄 File: src/clustering/kmeans_elbow.py
# Purpose: k-means baseline with the elbow rule choosing K from the WCSS curve
# =========================================

import logging
import warnings
from typing import Optional, Tuple

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from src.clustering.types import ClusterDataset, Clustering

log = logging.getLogger(__name__)

MAX_ITER = 50
RESTARTS = 5


def farthest_point_init(points: np.ndarray, K: int, start: int) -> np.ndarray:
    """Greedy farthest-point seeding from points[start]; first index wins ties."""
    chosen = [start]
    closest = np.linalg.norm(points - points[start], axis=1)
    for _ in range(1, K):
        nxt = int(np.argmax(closest))
        chosen.append(nxt)
        closest = np.minimum(closest, np.linalg.norm(points - points[nxt], axis=1))
    return points[chosen]


def _best_of_restarts(points: np.ndarray, K: int, rng: np.random.Generator,
                      restarts: int) -> Tuple[float, np.ndarray]:
    best_wcss, best_labels = np.inf, None
    for _ in range(restarts):
        init = farthest_point_init(points, K, int(rng.integers(len(points))))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            km = KMeans(n_clusters=K, init=init, n_init=1, max_iter=MAX_ITER, random_state=0).fit(points)
        if km.inertia_ < best_wcss:
            best_wcss, best_labels = float(km.inertia_), km.labels_.copy()
    return best_wcss, best_labels


def elbow_choice(wcss: np.ndarray) -> int:
    """
    K (1-based) maximizing the discrete second difference W[K-1] - 2 W[K] + W[K+1],
    with the curve padded flat past K_max. A zero curve gives K = 1.
    """
    if len(wcss) < 2 or wcss[0] <= 1e-12:
        return 1
    padded = np.append(wcss, wcss[-1])
    second = padded[:-2] - 2 * padded[1:-1] + padded[2:]  # candidates K = 2..K_max
    return int(np.argmax(second)) + 2


def kmeans_elbow(dataset: ClusterDataset, K_max: int = 8, seed: Optional[int] = 0,
                 restarts: int = RESTARTS, return_wcss: bool = False):
    """Run k-means for K = 1..K_max (clamped to the distinct point count) and keep the elbow K."""
    if K_max < 2:
        raise ValueError(f"K_max must be >= 2 (got {K_max})")
    points = np.asarray(dataset.points, dtype=float)
    if len(points) == 0:
        result = Clustering.empty()
        return (result, np.zeros(0)) if return_wcss else result

    distinct = len(np.unique(points, axis=0))
    k_cap = min(K_max, distinct)
    if k_cap < K_max:
        log.debug(f"k-means: K_max clamped from {K_max} to {k_cap} distinct points")

    rng = np.random.default_rng(seed)
    wcss, labelings = [], []
    for K in range(1, k_cap + 1):
        w, labels = _best_of_restarts(points, K, rng, restarts)
        wcss.append(w)
        labelings.append(labels)
    wcss = np.asarray(wcss)

    K = elbow_choice(wcss)
    result = Clustering.from_labels(labelings[K - 1], points)
    return (result, wcss) if return_wcss else result
