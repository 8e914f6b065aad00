# =========================================
# 📄 File: src/estimation/metrics.py
# Purpose: NMSE over (theta, tau), DMSE, gain NMSE, path error proportions,
#          and the per-trial EstimationReport
# =========================================

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.channel_model import ChannelRealization, SystemConfig
from src.estimation.matching import MatchResult, match_paths
from src.estimation.pipeline import PipelineResult
from src.transform import delay_offset_bins, wrap_theta

log = logging.getLogger(__name__)

SMALL_VALUE_GUARD = 1e-4


@dataclass(frozen=True)
class EstimationReport:
    L: int
    L_hat: int
    match: MatchResult
    nmse: float
    dmse_term: float
    gain_nmse: float

    @property
    def N_F(self) -> int:
        return self.match.N_F

    @property
    def N_miss(self) -> int:
        return self.match.N_miss


def nmse_sig(pairs: Sequence[Tuple[object, object]], cfg: SystemConfig) -> float:
    """
    Mean over matched (true, estimate) pairs of |dtheta|^2/theta^2 + |dtau|^2/tau^2.
    |theta| < 1e-4 uses the absolute squared error; |tau| Delta < 1e-4 the absolute
    error in units of 1/Delta. NaN without pairs.
    """
    if len(pairs) == 0:
        return float("nan")
    delta = cfg.subcarrier_spacing
    terms = []
    for true, est in pairs:
        d_theta = float(wrap_theta(est.theta - true.theta))
        d_tau = float(delay_offset_bins(est.tau - true.tau, cfg)) / cfg.bandwidth_hz  # around the 1/Delta circle
        if abs(true.theta) < SMALL_VALUE_GUARD:
            log.debug(f"theta={true.theta:.3g} below guard; absolute angle error used")
            t_angle = d_theta ** 2
        else:
            t_angle = d_theta ** 2 / true.theta ** 2
        if abs(true.tau) * delta < SMALL_VALUE_GUARD:
            log.debug(f"tau={true.tau:.3g}s below guard; absolute delay error used")
            t_delay = (d_tau * delta) ** 2
        else:
            t_delay = d_tau ** 2 / true.tau ** 2
        terms.append(t_angle + t_delay)
    return float(np.mean(terms))


def dmse_term(nmse: float, N_F: int) -> float:
    return nmse / (1 + N_F)


def dmse(nmses: Sequence[float], false_counts: Sequence[int]) -> float:
    """Trial mean of NMSE / (1 + N_F); trials without matched pairs are skipped."""
    terms = np.array([dmse_term(v, f) for v, f in zip(nmses, false_counts)], dtype=float)
    if terms.size == 0 or np.all(np.isnan(terms)):
        return float("nan")
    return float(np.nanmean(terms))


def gain_nmse(pairs: Sequence[Tuple[object, object]]) -> float:
    """sum |alpha_hat - alpha|^2 / sum |alpha|^2 over matched pairs."""
    if len(pairs) == 0:
        return float("nan")
    err = sum(abs(est.alpha - true.alpha) ** 2 for true, est in pairs)
    ref = sum(abs(true.alpha) ** 2 for true, _ in pairs)
    return float(err / ref) if ref > 0 else float("nan")


def path_error_proportions(false_counts: Sequence[int], L_hats: Sequence[int],
                           miss_counts: Sequence[int], Ls: Sequence[int]) -> Tuple[float, float]:
    """(sum N_F / sum L_hat, sum N_miss / sum L); a zero denominator gives 0."""
    total_hat, total_true = float(np.sum(L_hats)), float(np.sum(Ls))
    false_rate = float(np.sum(false_counts)) / total_hat if total_hat else 0.0
    miss_rate = float(np.sum(miss_counts)) / total_true if total_true else 0.0
    return false_rate, miss_rate


def evaluate_estimates(truth: ChannelRealization, result: PipelineResult, cfg: SystemConfig,
                       gate: float = 3.0) -> EstimationReport:
    match = match_paths(truth.paths, result.signatures, cfg, gate)
    pairs = [(truth.paths[t], result.signatures[e]) for t, e in match.pairs]
    nmse = nmse_sig(pairs, cfg)
    return EstimationReport(
        L=truth.L,
        L_hat=result.L_hat,
        match=match,
        nmse=nmse,
        dmse_term=dmse_term(nmse, match.N_F),
        gain_nmse=gain_nmse(pairs),
    )
