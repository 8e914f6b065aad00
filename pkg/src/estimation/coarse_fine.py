# =========================================
# 📄 File: src/estimation/coarse_fine.py
# Purpose: Per-cluster coarse bin, dual-wideband compensation, rotation fine-tuning,
#          and the final (theta, tau) mapping with the DFT modulo rules
# =========================================

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.channel_model import SystemConfig, phase_shift_matrix
from src.clustering.types import Clustering
from src.transform import fine_offset_grid, grid_bins, rotation_diag, wrap_theta

log = logging.getLogger(__name__)

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class CoarseBin:
    m: int  # angle bin
    n: int  # delay bin
    cluster: int


@dataclass(frozen=True)
class FineOffset:
    delta_m: float  # cycles/sample, |delta_m| <= 1/(2M)
    delta_n: float
    objective: float  # value at the chosen offsets
    objective_at_zero: float


def coarse_bins(G_D: np.ndarray, clustering: Clustering, origin: Tuple[int, int] = (0, 0)) -> List[CoarseBin]:
    """
    One bin per cluster: the support's largest magnitude, ties to the smallest (m, n).
    Cluster points are cut-open coordinates whose (0, 0) is grid bin `origin`.
    """
    mags = np.abs(G_D)
    out = []
    for c, support in enumerate(clustering.supports):
        if len(support) == 0:
            log.warning(f"Cluster {c} has an empty support; skipped")
            continue
        pts = grid_bins(clustering.points[support], origin, mags.shape)
        values = mags[pts[:, 0], pts[:, 1]]
        top = pts[values == values.max()]
        m, n = top[np.lexsort((top[:, 1], top[:, 0]))[0]]
        out.append(CoarseBin(int(m), int(n), c))
    return out


def remove_dual_wideband(H_hat: np.ndarray, theta_coarse: float, cfg: SystemConfig) -> np.ndarray:
    """H_tilde = H_hat o S*(theta); no-op for a narrowband configuration."""
    if not cfg.dual_wideband:
        return np.array(H_hat, copy=True)
    return H_hat * np.conj(phase_shift_matrix(theta_coarse, cfg))


def _projection_rows(K: int, bin_index: int, deltas: np.ndarray) -> np.ndarray:
    """Row a of the result is f_bin^H F_r(delta_a), with F_r(delta) = diag(rotation_diag(K, delta))."""
    f_bin_h = np.exp(2j * np.pi * np.arange(K) * bin_index / K) / np.sqrt(K)
    return np.stack([f_bin_h * rotation_diag(K, float(d)) for d in deltas])


def rotation_objective(H_tilde: np.ndarray, m: int, n: int, delta_m, delta_n) -> np.ndarray:
    """|f_m^H F_r^m(delta_m) H_tilde F_r^n(delta_n) f_n^*|^2 over the outer grid of offsets."""
    M, N = H_tilde.shape
    U = _projection_rows(M, m, np.atleast_1d(np.asarray(delta_m, dtype=float)))
    V = _projection_rows(N, n, np.atleast_1d(np.asarray(delta_n, dtype=float))).T
    return np.abs(U @ H_tilde @ V) ** 2


def fine_rotation(H_tilde: np.ndarray, m: int, n: int, R_M: int = 15, R_N: int = 15) -> FineOffset:
    """
    Exhaustive search over R_M x R_N half-bin offsets around (m, n).
    Near-ties (within a relative 1e-12 of the maximum) go to the smallest offset.
    """
    M, N = H_tilde.shape
    grid_m = fine_offset_grid(M, R_M)
    grid_n = fine_offset_grid(N, R_N)
    obj = rotation_objective(H_tilde, m, n, grid_m, grid_n)

    best = obj.max()
    a_idx, b_idx = np.nonzero(obj >= best * (1 - TIE_RTOL))
    candidates = [
        ((grid_m[a] * M) ** 2 + (grid_n[b] * N) ** 2, abs(grid_m[a]), abs(grid_n[b]), grid_m[a], grid_n[b], a, b)
        for a, b in zip(a_idx, b_idx)
    ]
    *_, a, b = min(candidates)
    at_zero = float(rotation_objective(H_tilde, m, n, 0.0, 0.0)[0, 0])
    return FineOffset(float(grid_m[a]), float(grid_n[b]), float(obj[a, b]), at_zero)


def finalize_signature(m: int, n: int, delta_m: float, delta_n: float, cfg: SystemConfig) -> Tuple[float, float]:
    """
    Fractional bins m + delta_m M and n + delta_n N mapped to theta_hat in [-1/2, 1/2)
    and tau_hat in [0, 1/Delta).
    """
    theta_hat = float(wrap_theta(m / cfg.antennas + delta_m))
    tau_hat = float(np.mod((n + delta_n * cfg.subcarriers) / cfg.bandwidth_hz, cfg.delay_period))
    return theta_hat, tau_hat
