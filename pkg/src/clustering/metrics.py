# =========================================
# 📄 File: src/clustering/metrics.py
# Purpose: Clustering metric (CM), count error (AE / MAE) and effective clustering metric (ECM)
# =========================================

from typing import Sequence

import numpy as np

from src.clustering.types import Clustering

CM_FLOOR = 0.5  # factor used for singleton or zero-spread clusters


def cluster_spread(points: np.ndarray) -> float:
    """sqrt(sigma_a^2 + sigma_d^2), population standard deviations of the bin coordinates."""
    spread = float(np.sqrt(np.sum(np.var(points, axis=0))))
    return spread if len(points) > 1 and spread > 0 else CM_FLOOR


def clustering_metric(clustering: Clustering) -> float:
    """Product of per-cluster spreads; NaN when nothing was clustered."""
    if clustering.L_hat == 0:
        return float("nan")
    return float(np.prod([cluster_spread(clustering.points[s]) for s in clustering.supports]))


def cluster_count_error(L_hat: int, L: int) -> int:
    if L < 1:
        raise ValueError(f"true path count must be >= 1 (got {L})")
    return abs(int(L_hat) - int(L))


def mae_over_trials(errors: Sequence[float]) -> float:
    return float(np.mean(errors)) if len(errors) else float("nan")


def ecm(errors: Sequence[float], cms: Sequence[float]) -> float:
    """Mean of (1 + AE) log10(CM) over trials; trials without clusters (CM NaN) are skipped."""
    errors = np.asarray(errors, dtype=float)
    cms = np.asarray(cms, dtype=float)
    if errors.shape != cms.shape:
        raise ValueError("errors and cms must have one entry per trial")
    valid = np.isfinite(cms)
    if not valid.any():
        return float("nan")
    if np.any(cms[valid] <= 0):
        raise ValueError("CM must be positive")
    return float(np.mean((1.0 + errors[valid]) * np.log10(cms[valid])))
