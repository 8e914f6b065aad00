# =========================================
# 📄 File: src/estimation/gains.py
# Purpose: Least-squares complex path gains for a set of estimated signatures
# =========================================

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.channel_model import SystemConfig, path_atom

log = logging.getLogger(__name__)

RIDGE = 1e-10


@dataclass(frozen=True)
class GainFit:
    alpha: np.ndarray  # (L_hat,) complex
    rank_deficient: bool = False


def gain_basis(signatures: Sequence[Tuple[float, float]], cfg: SystemConfig,
               dual_wideband: Optional[bool] = None) -> np.ndarray:
    """Columns b_l = vec(d(theta_l) c^T(tau_l) [o S(theta_l)])."""
    return np.column_stack([path_atom(t, d, cfg, dual_wideband).ravel() for t, d in signatures])


def estimate_gains(H_hat: np.ndarray, signatures: Sequence[Tuple[float, float]], cfg: SystemConfig,
                   dual_wideband: Optional[bool] = None) -> GainFit:
    """alpha_hat = (B^H B + ridge I)^-1 B^H vec(H_hat)."""
    if len(signatures) == 0:
        return GainFit(alpha=np.zeros(0, dtype=complex))
    B = gain_basis(signatures, cfg, dual_wideband)
    gram = B.conj().T @ B
    rank_deficient = np.linalg.matrix_rank(gram) < len(signatures)
    if rank_deficient:
        log.warning(f"Gain basis is rank deficient ({len(signatures)} signatures, duplicates?); ridge-regularized")
    alpha = linalg.solve(gram + RIDGE * np.eye(len(signatures)), B.conj().T @ np.ravel(H_hat), assume_a="her")
    return GainFit(alpha=np.asarray(alpha, dtype=complex), rank_deficient=bool(rank_deficient))
