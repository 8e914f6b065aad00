# =========================================
# 📄 File: src/transform.py
# Purpose: Unitary 2-D DFT between space-frequency (H) and delay-angle (G) domains,
#          bin <-> (theta, tau) mapping with the DFT modulo rules, rotation diagonals
# =========================================

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.channel_model import SystemConfig


def dft_matrix(K: int) -> np.ndarray:
    """Unitary K x K DFT matrix, F[k, l] = exp(-j 2 pi k l / K) / sqrt(K)."""
    if K < 1:
        raise ValueError(f"K must be >= 1 (got {K})")
    k = np.arange(K)
    return np.exp(-2j * np.pi * np.outer(k, k) / K) / np.sqrt(K)


def to_delay_angle(H: np.ndarray) -> np.ndarray:
    """G = F_M^H H F_N^*; rows are angle bins, columns delay bins."""
    # F^H x == sqrt(K) * ifft(x), and right-multiplying by F^* is the same along axis 1
    return np.fft.ifft2(H, norm="ortho")


def to_space_frequency(G: np.ndarray) -> np.ndarray:
    """Inverse of to_delay_angle: H = F_M G F_N^T."""
    return np.fft.fft2(G, norm="ortho")


def wrap_theta(theta):
    """Wrap spatial frequencies into [-1/2, 1/2)."""
    return np.mod(np.asarray(theta, dtype=float) + 0.5, 1.0) - 0.5


def angle_bin_to_theta(m, M: int):
    """Angle bin m -> theta = m/M, bins above M/2 mapping to negative angles."""
    out = wrap_theta(np.asarray(m, dtype=float) / M)
    return float(out) if np.ndim(out) == 0 else out


def theta_to_angle_bin(theta, M: int):
    """Nearest angle bin index in [0, M) for a spatial frequency."""
    out = np.mod(np.rint(np.asarray(theta, dtype=float) * M), M).astype(int)
    return int(out) if np.ndim(out) == 0 else out


def delay_bin_to_tau(n, cfg: SystemConfig):
    """Delay bin n -> tau = n / (N Delta), wrapped into [0, 1/Delta)."""
    out = np.mod(np.asarray(n, dtype=float) / cfg.bandwidth_hz, cfg.delay_period)
    return float(out) if np.ndim(out) == 0 else out


def tau_to_delay_bin(tau, cfg: SystemConfig):
    out = np.mod(np.rint(np.asarray(tau, dtype=float) * cfg.bandwidth_hz), cfg.subcarriers).astype(int)
    return int(out) if np.ndim(out) == 0 else out


def delay_offset_bins(d_tau, cfg: SystemConfig):
    """Delay difference in bins on the circle of period N bins, wrapped into [-N/2, N/2)."""
    N = cfg.subcarriers
    return np.mod(np.asarray(d_tau, dtype=float) * cfg.bandwidth_hz + N / 2, N) - N / 2


# -----------------------
# Periodic grid cut-open
# -----------------------
# Angle bin M-1 neighbors bin 0 and delay bin N-1 neighbors bin 0. Clustering works on
# straight-line coordinates, so the grid is rolled to put its seam on the quietest row
# and column, and kept bins are mapped back with grid_bins.

def quiet_seam(G: np.ndarray) -> Tuple[int, int]:
    """(angle row, delay column) with the least energy; first index on ties."""
    energy = np.abs(np.asarray(G)) ** 2
    return int(np.argmin(energy.sum(axis=1))), int(np.argmin(energy.sum(axis=0)))


def cut_open(G: np.ndarray, origin: Tuple[int, int]) -> np.ndarray:
    """Roll G so that origin becomes entry (0, 0): out[i, j] = G[(i + o_m) % M, (j + o_n) % N]."""
    return np.roll(np.asarray(G), (-origin[0], -origin[1]), axis=(0, 1))


def grid_bins(points: np.ndarray, origin: Tuple[int, int], shape: Tuple[int, int]) -> np.ndarray:
    """Cut-open coordinates back to (angle bin, delay bin) indices of the original grid."""
    pts = np.rint(np.asarray(points, dtype=float)).astype(int).reshape(-1, 2)
    return np.mod(pts + np.asarray(origin, dtype=int), np.asarray(shape, dtype=int))


@dataclass(frozen=True)
class RotationDiagonal:
    """diag{1, e^{j2pi delta}, ..., e^{j2pi(K-1)delta}}; delta in cycles/sample."""

    K: int
    delta: float

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1 (got {self.K})")
        if abs(self.delta) > 1.0 / self.K:
            raise ValueError(
                f"|delta| = {abs(self.delta):.4g} exceeds one bin (1/K = {1.0 / self.K:.4g}); "
                "rotations refine within half a bin"
            )

    @property
    def entries(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.K) * self.delta)


def rotation_diag(K: int, delta: float) -> np.ndarray:
    """Materialized diagonal of the fine rotation matrix."""
    return RotationDiagonal(K, delta).entries


def fine_offset_grid(K: int, levels: int) -> np.ndarray:
    """`levels` uniform offsets on [-1/(2K), 1/(2K)]; odd levels contain 0 exactly."""
    if levels < 2:
        raise ValueError(f"rotation levels must be >= 2 (got {levels})")
    return (np.arange(levels) - (levels - 1) / 2) / ((levels - 1) * K)
