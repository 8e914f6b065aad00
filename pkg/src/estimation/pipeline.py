# =========================================
# 📄 File: src/estimation/pipeline.py
# Purpose: End-to-end signature estimation on one received frame
#   LS -> delay-angle -> denoise -> back-map -> cut open -> threshold -> cluster
#   -> per cluster: coarse bin, dual-wideband compensation, rotation fine-tuning
#   -> least-squares gains
# =========================================

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from src.channel_model import SystemConfig, path_atom
from src.clustering.kmeans_elbow import kmeans_elbow
from src.clustering.lgc import lgc_cluster
from src.clustering.thresholds import energy_threshold, percentile_threshold
from src.clustering.types import ClusterDataset, Clustering
from src.denoise.apply import DenoiserModel, denoise_delay_angle
from src.estimation.coarse_fine import CoarseBin, coarse_bins, fine_rotation, finalize_signature, remove_dual_wideband
from src.estimation.gains import estimate_gains
from src.link_sim import Preamble, ReceivedFrame, ls_estimate
from src.transform import angle_bin_to_theta, cut_open, quiet_seam, to_delay_angle

log = logging.getLogger(__name__)

SIGNATURE_COLUMNS = ["cluster", "m", "n", "delta_m", "delta_n", "theta_hat", "tau_hat_s", "alpha_re", "alpha_im"]


@dataclass(frozen=True)
class PipelineOptions:
    denoiser: str = "cnn"  # none | mean | median | cnn
    filter_size: int = 3
    threshold: str = "pt"  # et | pt
    percentile: float = 95.0
    clusterer: str = "lgc"  # lgc | kmeans
    lgc_k: int = 8
    k_max: int = 8
    rotation_levels_m: int = 15
    rotation_levels_n: int = 15
    compensate_dual_wideband: bool = True  # False = single-wideband baseline
    sic: bool = False
    kmeans_seed: int = 0

    def __post_init__(self):
        if self.denoiser not in ("none", "mean", "median", "cnn"):
            raise ValueError(f"unknown denoiser '{self.denoiser}'")
        if self.threshold not in ("et", "pt"):
            raise ValueError(f"unknown threshold '{self.threshold}'")
        if self.clusterer not in ("lgc", "kmeans"):
            raise ValueError(f"unknown clusterer '{self.clusterer}'")

    def with_(self, **changes) -> "PipelineOptions":
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, section: Dict[str, Any]) -> "PipelineOptions":
        """Build from the `pipeline` section of a loaded config."""
        return cls(
            denoiser=section["denoiser"],
            filter_size=int(section["filter_size"]),
            threshold=section["threshold"],
            percentile=float(section["percentile"]),
            clusterer=section["clusterer"],
            lgc_k=int(section["lgc_k"]),
            k_max=int(section["kmeans_k_max"]),
            rotation_levels_m=int(section["rotation_levels_m"]),
            rotation_levels_n=int(section["rotation_levels_n"]),
            sic=bool(section.get("sic", False)),
        )


@dataclass(frozen=True)
class FineSignature:
    theta_hat: float
    tau_hat: float
    alpha_hat: complex
    coarse: CoarseBin
    delta_m: float
    delta_n: float

    @property
    def theta(self) -> float:
        return self.theta_hat

    @property
    def tau(self) -> float:
        return self.tau_hat

    @property
    def alpha(self) -> complex:
        return self.alpha_hat


@dataclass
class PipelineResult:
    signatures: Tuple[FineSignature, ...]
    dataset: ClusterDataset
    clustering: Clustering
    G_hat: np.ndarray  # delay-angle LS estimate (complex)
    G_denoised: np.ndarray  # back-mapped denoised magnitudes
    gain_rank_deficient: bool = False
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def L_hat(self) -> int:
        return len(self.signatures)


def make_dataset(G_D: np.ndarray, options: PipelineOptions) -> ClusterDataset:
    """Threshold the grid cut open along its quietest row and column; dataset.origin maps points back."""
    origin = quiet_seam(G_D)
    opened = cut_open(G_D, origin)
    if options.threshold == "et":
        data = energy_threshold(opened)
    else:
        data = percentile_threshold(opened, options.percentile)
    return replace(data, origin=origin)


def run_clusterer(dataset: ClusterDataset, options: PipelineOptions) -> Clustering:
    if options.clusterer == "lgc":
        return lgc_cluster(dataset, options.lgc_k)
    return kmeans_elbow(dataset, options.k_max, seed=options.kmeans_seed)


def estimate_all(
    frame: ReceivedFrame,
    preamble: Preamble,
    cfg: SystemConfig,
    options: PipelineOptions,
    model: Optional[DenoiserModel] = None,
) -> PipelineResult:
    """Run every stage on one frame; an empty dataset yields L_hat = 0 rather than an error."""
    H_hat = ls_estimate(frame, preamble)
    G_hat = to_delay_angle(H_hat)
    G_D = denoise_delay_angle(G_hat, options.denoiser, model, options.filter_size, frame.sigma2)

    dataset = make_dataset(G_D, options)
    clustering = run_clusterer(dataset, options) if len(dataset) else Clustering.empty()
    if clustering.L_hat == 0:
        log.info("No clusters detected; L_hat = 0")
        return PipelineResult((), dataset, clustering, G_hat, G_D)

    use_squint = cfg.dual_wideband and options.compensate_dual_wideband
    residual = H_hat.copy()
    found = []
    for coarse in coarse_bins(G_D, clustering, dataset.origin):
        theta_coarse = angle_bin_to_theta(coarse.m, cfg.antennas)
        H_tilde = remove_dual_wideband(residual, theta_coarse, cfg) if use_squint else residual
        offset = fine_rotation(H_tilde, coarse.m, coarse.n, options.rotation_levels_m, options.rotation_levels_n)
        theta_hat, tau_hat = finalize_signature(coarse.m, coarse.n, offset.delta_m, offset.delta_n, cfg)
        found.append((coarse, offset, theta_hat, tau_hat))
        if options.sic:
            atom = path_atom(theta_hat, tau_hat, cfg, use_squint)
            residual = residual - atom * (np.vdot(atom, residual) / np.vdot(atom, atom))

    fit = estimate_gains(H_hat, [(t, d) for _, _, t, d in found], cfg, use_squint)
    signatures = tuple(
        FineSignature(t, d, complex(a), coarse, off.delta_m, off.delta_n)
        for (coarse, off, t, d), a in zip(found, fit.alpha)
    )
    log.debug(f"Estimated {len(signatures)} signatures (denoiser={options.denoiser}, "
              f"threshold={options.threshold}, clusterer={options.clusterer})")
    return PipelineResult(signatures, dataset, clustering, G_hat, G_D, fit.rank_deficient)


def signatures_frame(result: PipelineResult) -> pd.DataFrame:
    """Signature dump table, one row per estimated path."""
    rows = [
        [s.coarse.cluster, s.coarse.m, s.coarse.n, s.delta_m, s.delta_n, s.theta_hat, s.tau_hat,
         s.alpha_hat.real, s.alpha_hat.imag]
        for s in result.signatures
    ]
    return pd.DataFrame(rows, columns=SIGNATURE_COLUMNS)
