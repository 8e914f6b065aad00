# =========================================
# 📄 File: src/clustering/lgc.py
# Purpose: Local gravitation clustering over delay-angle bins
# - mass from kNN distances, local resultant forces (LRF)
# - centrality / coordination, center selection, mutual-kNN linking
# - nearest-center assignment within r0, NOISE otherwise
# Fully deterministic: exact distances, stable neighbor order, no random steps.
# =========================================

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from src.clustering.types import NOISE, ClusterDataset, Clustering

log = logging.getLogger(__name__)

FORCE_EPS = 1e-12
GRID_ADJACENT = np.sqrt(2.0) + 1e-9  # 8-neighborhood on the bin grid


@dataclass(frozen=True)
class LGCDiagnostics:
    mass: np.ndarray
    lrf: np.ndarray  # (P, 2) local resultant force
    centrality: np.ndarray
    coordination: np.ndarray
    centers: np.ndarray  # bool mask
    r0: float


def _cosine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cosine along the last axis; 0 where either vector is zero."""
    num = np.sum(a * b, axis=-1)
    den = np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _components(adjacency: np.ndarray) -> np.ndarray:
    _, labels = connected_components(csr_matrix(adjacency), directed=False)
    return labels


def _small_dataset_fallback(points: np.ndarray) -> Clustering:
    """Grid-adjacent connected components; a contiguous set is one cluster."""
    dist = cdist(points, points)
    labels = _components(dist <= GRID_ADJACENT)
    return Clustering.from_labels(labels, points, fallback=True)


def lgc_cluster(
    dataset: ClusterDataset,
    k_neighbors: int = 8,
    center_percentile: float = 75.0,
    r0_factor: float = 2.0,
    merge_linked: bool = True,
    return_diagnostics: bool = False,
) -> Union[Clustering, Tuple[Clustering, LGCDiagnostics]]:
    """
    Cluster the dataset's (i, j) coordinates; L_hat is the number of clusters found.

    Steps: mass m_p = 1 / mean kNN distance; LRF_p = sum_q m_p m_q (x_q - x_p) / |x_q - x_p|^3;
    centrality CE_p = mean_q cos(LRF_q, x_p - x_q); coordination CO_p = mean_q cos(LRF_p, LRF_q);
    centers = CE above its center_percentile; centers joined along mutual-kNN edges no longer than r0;
    other points take the label of their nearest center within r0 = r0_factor * median kNN distance.
    With merge_linked, clusters touching through a mutual-kNN edge within r0 are merged.
    Datasets with at most k points use grid-adjacent components and are flagged.
    """
    if k_neighbors < 3:
        raise ValueError(f"k_neighbors must be >= 3 (got {k_neighbors})")
    points = np.asarray(dataset.points, dtype=float)
    P = len(points)
    if P == 0:
        result = Clustering.empty()
        return (result, None) if return_diagnostics else result
    if P <= k_neighbors:
        log.warning(f"LGC: {P} points <= k={k_neighbors}; using grid-adjacent components")
        result = _small_dataset_fallback(points)
        return (result, None) if return_diagnostics else result

    # kNN graph
    k = k_neighbors
    dist = cdist(points, points)
    np.fill_diagonal(dist, np.inf)
    nbr = np.argsort(dist, axis=1, kind="stable")[:, :k]
    knn_dist = np.take_along_axis(dist, nbr, axis=1)

    # Mass and local resultant force
    mass = 1.0 / np.maximum(knn_dist.mean(axis=1), FORCE_EPS)
    offsets = points[nbr] - points[:, None, :]  # x_q - x_p, (P, k, 2)
    strength = mass[:, None] * mass[nbr] / np.maximum(knn_dist ** 3, FORCE_EPS)
    lrf = np.sum(strength[..., None] * offsets, axis=1)

    # Centrality and coordination
    centrality = _cosine(lrf[nbr], -offsets).mean(axis=1)
    coordination = _cosine(lrf[:, None, :], lrf[nbr]).mean(axis=1)

    # Pick centers
    cut = np.percentile(centrality, center_percentile)
    centers = centrality > cut
    if not centers.any():
        centers = centrality >= cut

    # Link centers along short mutual-kNN edges
    r0 = r0_factor * float(np.median(knn_dist))
    is_nbr = np.zeros((P, P), dtype=bool)
    is_nbr[np.repeat(np.arange(P), k), nbr.ravel()] = True
    linked = is_nbr & is_nbr.T & (dist <= r0)

    center_idx = np.flatnonzero(centers)
    center_labels = _components(linked[np.ix_(center_idx, center_idx)])

    # Non-centers join the nearest center within r0
    labels = np.full(P, NOISE, dtype=int)
    labels[center_idx] = center_labels
    others = np.flatnonzero(~centers)
    if len(others):
        to_centers = dist[np.ix_(others, center_idx)]
        nearest = np.argmin(to_centers, axis=1)
        within = to_centers[np.arange(len(others)), nearest] <= r0
        labels[others[within]] = center_labels[nearest[within]]

    if merge_linked:
        labels = _merge_linked_clusters(labels, linked)

    result = Clustering.from_labels(labels, points)
    log.debug(f"LGC: {P} points, {len(center_idx)} centers, r0={r0:.3g}, L_hat={result.L_hat}")
    if return_diagnostics:
        return result, LGCDiagnostics(mass, lrf, centrality, coordination, centers, r0)
    return result


def _merge_linked_clusters(labels: np.ndarray, linked: np.ndarray) -> np.ndarray:
    count = labels.max() + 1
    if count <= 1:
        return labels
    p, q = np.nonzero(linked)
    # Edges between two different clusters
    keep = (labels[p] != NOISE) & (labels[q] != NOISE) & (labels[p] != labels[q])
    graph = np.eye(count, dtype=bool)
    graph[labels[p[keep]], labels[q[keep]]] = True
    merged = _components(graph)
    # Noise stays noise
    return np.where(labels == NOISE, NOISE, merged[np.maximum(labels, 0)])
