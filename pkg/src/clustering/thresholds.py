# =========================================
# 📄 File: src/clustering/thresholds.py
# Purpose: Hard thresholds turning a denoised delay-angle magnitude matrix into a ClusterDataset
# - ET: keep entries strictly above the RMS value sqrt(||G||_F^2 / MN)
# - PT: keep entries strictly above the nearest-rank alpha-percentile
# =========================================

import math
import logging

import numpy as np

from src.clustering.types import ClusterDataset

log = logging.getLogger(__name__)


def _dataset_from_mask(mags: np.ndarray, keep: np.ndarray, degenerate: bool) -> ClusterDataset:
    i, j = np.nonzero(keep)  # row-major order
    return ClusterDataset(
        points=np.column_stack([i, j]).astype(float),
        weights=mags[i, j].astype(float),
        shape=mags.shape,
        degenerate=degenerate,
    )


def energy_threshold(G_D: np.ndarray) -> ClusterDataset:
    # RMS magnitude of the whole grid
    mags = np.abs(np.asarray(G_D))
    cutoff = math.sqrt(float(np.sum(mags ** 2)) / mags.size)
    degenerate = cutoff == 0.0
    if degenerate:
        log.warning("Energy threshold on an all-zero matrix; dataset is empty")
    # Strict comparison
    return _dataset_from_mask(mags, mags > cutoff, degenerate)


def nearest_rank_percentile(values: np.ndarray, alpha: float) -> float:
    """Smallest value with at least alpha % of the data at or below it."""
    ordered = np.sort(np.ravel(values))
    # round() absorbs float noise in alpha * n before ceil
    rank = max(1, math.ceil(round(alpha * ordered.size / 100.0, 9)))
    return float(ordered[rank - 1])


def percentile_threshold(G_D: np.ndarray, alpha: float = 95.0) -> ClusterDataset:
    if not 0 < alpha < 100:
        raise ValueError(f"percentile alpha must lie in (0, 100) (got {alpha})")
    # Flat grid keeps nothing
    mags = np.abs(np.asarray(G_D))
    degenerate = bool(mags.max() == mags.min())
    if degenerate:
        log.warning("Percentile threshold on an all-equal matrix; dataset is empty")
    cutoff = nearest_rank_percentile(mags, alpha)
    return _dataset_from_mask(mags, mags > cutoff, degenerate)
