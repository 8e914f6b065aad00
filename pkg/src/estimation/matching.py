# =========================================
# 📄 File: src/estimation/matching.py
# Purpose: One-to-one assignment of estimated paths to true paths (Hungarian, gated)
# =========================================

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.channel_model import SystemConfig
from src.transform import delay_offset_bins, wrap_theta


@dataclass(frozen=True)
class MatchResult:
    pairs: Tuple[Tuple[int, int], ...]  # (true index, estimate index)
    N_F: int  # estimates left unmatched (false detections)
    N_miss: int  # true paths left unmatched

    @property
    def matched(self) -> int:
        return len(self.pairs)


def bin_offsets(true_paths: Sequence, estimates: Sequence, cfg: SystemConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Circular angle and delay differences in bins, shape (L, L_hat) each."""
    th_t = np.array([p.theta for p in true_paths])[:, None]
    th_e = np.array([e.theta for e in estimates])[None, :]
    ta_t = np.array([p.tau for p in true_paths])[:, None]
    ta_e = np.array([e.tau for e in estimates])[None, :]
    d_angle = wrap_theta(th_e - th_t) * cfg.antennas
    d_delay = delay_offset_bins(ta_e - ta_t, cfg)
    return d_angle, d_delay


def match_paths(true_paths: Sequence, estimates: Sequence, cfg: SystemConfig, gate: float = 3.0) -> MatchResult:
    """
    Minimize the summed (angle, delay) bin distance; pairs more than `gate` bins apart
    in either dimension are dropped and counted as one false detection plus one miss.
    """
    L, L_hat = len(true_paths), len(estimates)
    if L == 0 or L_hat == 0:
        return MatchResult((), L_hat, L)
    d_angle, d_delay = bin_offsets(true_paths, estimates, cfg)
    cost = np.hypot(d_angle, d_delay)
    rows, cols = linear_sum_assignment(cost)
    pairs = tuple(
        (int(r), int(c)) for r, c in zip(rows, cols)
        if abs(d_angle[r, c]) <= gate and abs(d_delay[r, c]) <= gate
    )
    return MatchResult(pairs, L_hat - len(pairs), L - len(pairs))
