# =========================================
# 📄 File: src/clustering/types.py
# Purpose: ClusterDataset (thresholded bins) and Clustering (labels + supports)
# =========================================

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.transform import grid_bins

NOISE = -1


@dataclass(frozen=True)
class ClusterDataset:
    """Kept delay-angle bins: points[:, 0] = angle bin i, points[:, 1] = delay bin j, weights = magnitude."""

    points: np.ndarray  # (P, 2) float coordinates
    weights: np.ndarray  # (P,)
    shape: Tuple[int, int] = (0, 0)
    degenerate: bool = False  # all-zero / all-equal input
    origin: Tuple[int, int] = (0, 0)  # grid bin at point (0, 0) when thresholded on a cut-open grid

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def bins(self) -> np.ndarray:
        """Points as (angle bin, delay bin) indices of the uncut delay-angle grid."""
        if self.shape == (0, 0):
            return np.rint(self.points).astype(int).reshape(-1, 2)
        return grid_bins(self.points, self.origin, self.shape)

    @classmethod
    def from_points(cls, points, weights=None, shape: Tuple[int, int] = (0, 0)) -> "ClusterDataset":
        """Wrap arbitrary 2-D coordinates (synthetic blobs, moons) as a dataset."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        weights = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
        return cls(points=points, weights=weights, shape=shape)


@dataclass(frozen=True)
class Clustering:
    labels: np.ndarray  # (P,) cluster id in 0..L_hat-1 or NOISE
    supports: Tuple[np.ndarray, ...]  # point indices per cluster, partitioning the non-noise points
    points: np.ndarray  # (P, 2) coordinates the labels refer to
    fallback: bool = False  # small-dataset rule used instead of the main algorithm

    @property
    def L_hat(self) -> int:
        return len(self.supports)

    @classmethod
    def from_labels(cls, labels, points, fallback: bool = False) -> "Clustering":
        """Renumber clusters by first appearance so equal partitions give equal labels."""
        labels = np.asarray(labels, dtype=int)
        out = np.full(labels.shape, NOISE, dtype=int)
        mapping = {}
        for p, lab in enumerate(labels):
            if lab == NOISE:
                continue
            if lab not in mapping:
                mapping[lab] = len(mapping)
            out[p] = mapping[lab]
        supports: List[np.ndarray] = [np.flatnonzero(out == c) for c in range(len(mapping))]
        return cls(labels=out, supports=tuple(supports), points=np.asarray(points, dtype=float), fallback=fallback)

    @classmethod
    def empty(cls) -> "Clustering":
        return cls(labels=np.zeros(0, dtype=int), supports=(), points=np.zeros((0, 2)))
