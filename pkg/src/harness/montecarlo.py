# =========================================
# 📄 File: src/harness/montecarlo.py
# Purpose: Seeded Monte Carlo runner over SNR points and pipeline stages
# - Per-trial generators split from the master seed (independent of worker count)
# - Stages: denoise (image-equivalent SNR), cluster (ET/PT x kmeans/LGC), estimate (3 variants)
# - pandas aggregation per SNR and CSV output
# =========================================

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
import torch

from src.channel_model import draw_random_scene, synthesize_channel
from src.clustering.metrics import cluster_count_error, clustering_metric, ecm
from src.denoise.apply import denoise_delay_angle
from src.denoise.dncnn import DenoiserWeights, module_from_weights
from src.denoise.metrics import image_equivalent_snr, relative_snr_gain
from src.estimation.metrics import dmse, evaluate_estimates, path_error_proportions
from src.estimation.pipeline import estimate_all, make_dataset, run_clusterer
from src.harness.experiment import ExperimentConfig
from src.io_formats import save_table
from src.link_sim import apply_channel_awgn, generate_preamble, ls_estimate
from src.transform import to_delay_angle

log = logging.getLogger(__name__)

STAGES = ("denoise", "cluster", "estimate")
VARIANTS = ("proposed", "no-denoise", "single-wideband")
CLUSTER_METHODS = (("kmeans", "et"), ("kmeans", "pt"), ("lgc", "et"), ("lgc", "pt"))
TRIAL_COLUMNS = ["seed", "snr_db", "denoiser", "threshold", "clusterer", "L", "L_hat",
                 "N_F", "N_miss", "nmse", "dmse_term", "gain_nmse"]


def trial_seed_sequence(master_seed: int, trial: int, snr_index: Optional[int] = None) -> np.random.SeedSequence:
    """Counter-based split: scene stream (trial,), noise stream (trial, snr_index + 1)."""
    key = (trial,) if snr_index is None else (trial, snr_index + 1)
    return np.random.SeedSequence(master_seed, spawn_key=key)


def trial_seed(master_seed: int, trial: int) -> int:
    return int(trial_seed_sequence(master_seed, trial).generate_state(1)[0])


@dataclass
class MonteCarloTables:
    denoise_trials: pd.DataFrame = field(default_factory=pd.DataFrame)
    cluster_trials: pd.DataFrame = field(default_factory=pd.DataFrame)
    estimate_trials: Dict[str, pd.DataFrame] = field(default_factory=dict)

    def denoise_table(self) -> pd.DataFrame:
        """Per SNR and denoiser: mean/median image-equivalent SNR before/after, relative gain of the means."""
        cols = ["snr_db", "denoiser", "snr_bd_mean", "snr_bd_median", "snr_ad_mean", "snr_ad_median",
                "relative_gain_pct"]
        if self.denoise_trials.empty:
            return pd.DataFrame(columns=cols)
        agg = (self.denoise_trials.groupby(["snr_db", "denoiser"], sort=False)[["snr_bd", "snr_ad"]]
               .agg(["mean", "median"]))
        agg.columns = [f"{a}_{b}" for a, b in agg.columns]
        agg = agg.reset_index()
        agg["relative_gain_pct"] = [relative_snr_gain(bd, ad) for bd, ad in zip(agg.snr_bd_mean, agg.snr_ad_mean)]
        return agg[cols]

    def cluster_table(self) -> pd.DataFrame:
        """Per SNR, threshold and clusterer: CM mean/median, AE mean (MAE)/median and ECM."""
        cols = ["snr_db", "threshold", "clusterer", "cm_mean", "cm_median", "mae", "ae_median", "ecm"]
        if self.cluster_trials.empty:
            return pd.DataFrame(columns=cols)
        rows = []
        for (snr, th, cl), g in self.cluster_trials.groupby(["snr_db", "threshold", "clusterer"], sort=False):
            rows.append([snr, th, cl, g.cm.mean(), g.cm.median(), g.ae.mean(), g.ae.median(),
                         ecm(g.ae.to_numpy(), g.cm.to_numpy())])
        return pd.DataFrame(rows, columns=cols)

    def estimation_table(self) -> pd.DataFrame:
        """Per variant and SNR: DMSE, mean NMSE, gain NMSE and path error proportions."""
        cols = ["variant", "snr_db", "dmse", "nmse_mean", "gain_nmse_mean", "false_rate", "miss_rate"]
        rows = []
        for variant, trials in self.estimate_trials.items():
            for snr, g in trials.groupby("snr_db", sort=False):
                false_rate, miss_rate = path_error_proportions(g.N_F, g.L_hat, g.N_miss, g.L)
                rows.append([variant, snr, dmse(g.nmse, g.N_F), g.nmse.mean(), g.gain_nmse.mean(),
                             false_rate, miss_rate])
        return pd.DataFrame(rows, columns=cols)

    def write(self, output_dir: Path) -> List[Path]:
        output_dir = Path(output_dir)
        written = []
        if not self.denoise_trials.empty:
            written += [output_dir / "trials_denoise.csv", output_dir / "table_denoise.csv"]
            save_table(self.denoise_trials, written[-2])
            save_table(self.denoise_table(), written[-1])
        if not self.cluster_trials.empty:
            written += [output_dir / "trials_cluster.csv", output_dir / "table_cluster.csv"]
            save_table(self.cluster_trials, written[-2])
            save_table(self.cluster_table(), written[-1])
        for variant, trials in self.estimate_trials.items():
            written.append(output_dir / f"trials_{variant}.csv")
            save_table(trials[TRIAL_COLUMNS], written[-1])
        if self.estimate_trials:
            written.append(output_dir / "table_estimation.csv")
            save_table(self.estimation_table(), written[-1])
        return written


def _run_trial(args: Tuple[ExperimentConfig, int, Optional[DenoiserWeights], Tuple[str, ...]]) -> Dict[str, list]:
    """All SNR points of one trial; returns record lists keyed by stage / variant."""
    config, trial, weights, stages = args
    torch.set_num_threads(1)
    cfg, options = config.system, config.pipeline
    model = module_from_weights(weights) if weights is not None else None

    # Scene and preamble share the trial stream
    scene_rng = np.random.default_rng(trial_seed_sequence(config.master_seed, trial))
    truth = draw_random_scene(scene_rng, cfg, config.path_range, config.min_separation_bins)
    H = synthesize_channel(truth, cfg)
    G_clean = to_delay_angle(H)
    preamble = generate_preamble(scene_rng, cfg.subcarriers)
    seed = trial_seed(config.master_seed, trial)

    out: Dict[str, list] = {"denoise": [], "cluster": [], **{v: [] for v in VARIANTS}}
    for s_idx, snr in enumerate(config.snr_db):
        # One noise stream per SNR point
        noise_rng = np.random.default_rng(trial_seed_sequence(config.master_seed, trial, s_idx))
        frame = apply_channel_awgn(H, preamble, snr, noise_rng)
        G_hat = to_delay_angle(ls_estimate(frame, preamble))

        if "denoise" in stages:
            bd = image_equivalent_snr(G_clean, G_hat)
            for method in ("mean", "median") + (("cnn",) if model is not None else ()):
                mags = denoise_delay_angle(G_hat, method, model, options.filter_size, frame.sigma2)
                out["denoise"].append({"trial": trial, "snr_db": snr, "denoiser": method,
                                       "snr_bd": bd, "snr_ad": image_equivalent_snr(G_clean, mags)})

        if "cluster" in stages:
            G_D = denoise_delay_angle(G_hat, options.denoiser, model, options.filter_size, frame.sigma2)
            for clusterer, threshold in CLUSTER_METHODS:
                variant = options.with_(clusterer=clusterer, threshold=threshold)
                dataset = make_dataset(G_D, variant)
                clustering = run_clusterer(dataset, variant) if len(dataset) else None
                L_hat = clustering.L_hat if clustering is not None else 0
                out["cluster"].append({
                    "trial": trial, "snr_db": snr, "threshold": threshold, "clusterer": clusterer,
                    "L": truth.L, "L_hat": L_hat, "ae": cluster_count_error(L_hat, truth.L),
                    "cm": clustering_metric(clustering) if clustering is not None else float("nan"),
                })

        if "estimate" in stages:
            # Proposed pipeline and the two baselines
            variants = {
                "proposed": options,
                "no-denoise": options.with_(denoiser="none"),
                "single-wideband": options.with_(compensate_dual_wideband=False),
            }
            for name, opts in variants.items():
                result = estimate_all(frame, preamble, cfg, opts, model)
                report = evaluate_estimates(truth, result, cfg, config.match_gate_bins)
                out[name].append({
                    "trial": trial, "seed": seed, "snr_db": snr, "denoiser": opts.denoiser,
                    "threshold": opts.threshold, "clusterer": opts.clusterer, "L": report.L,
                    "L_hat": report.L_hat, "N_F": report.N_F, "N_miss": report.N_miss, "nmse": report.nmse,
                    "dmse_term": report.dmse_term, "gain_nmse": report.gain_nmse,
                })
    log.debug(f"Trial {trial} done (L={truth.L})")
    return out


def run_montecarlo(config: ExperimentConfig, weights: Optional[DenoiserWeights] = None,
                   stages: Iterable[str] = STAGES) -> MonteCarloTables:
    """
    Run config.trials independent trials over config.snr_db.
    Results are ordered by trial then SNR, so outputs do not depend on config.workers.
    """
    stages = tuple(stages)
    unknown = set(stages) - set(STAGES)
    if unknown:
        raise ValueError(f"unknown stages {sorted(unknown)} (expected a subset of {list(STAGES)})")
    needs_model = config.pipeline.denoiser == "cnn" and ("cluster" in stages or "estimate" in stages)
    if needs_model and weights is None:
        raise ValueError("pipeline.denoiser is 'cnn' but no denoiser weights were given (run `denoise-train`)")

    # Run trials
    jobs = [(config, t, weights, stages) for t in range(config.trials)]
    log.info(f"Monte Carlo: {config.trials} trials x {len(config.snr_db)} SNR points, "
             f"stages={list(stages)}, workers={config.workers}")
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_trial, jobs))  # map preserves trial order
    else:
        results = [_run_trial(job) for job in jobs]

    def frame_of(key: str) -> pd.DataFrame:
        return pd.DataFrame([rec for res in results for rec in res[key]])

    # Collect records into DataFrames
    tables = MonteCarloTables()
    if "denoise" in stages:
        tables.denoise_trials = frame_of("denoise")
    if "cluster" in stages:
        tables.cluster_trials = frame_of("cluster")
    if "estimate" in stages:
        tables.estimate_trials = {v: frame_of(v) for v in VARIANTS}
        for snr, g in tables.estimate_trials["proposed"].groupby("snr_db", sort=False):
            false_rate, miss_rate = path_error_proportions(g.N_F, g.L_hat, g.N_miss, g.L)
            log.info(f"SNR {snr:+g} dB: DMSE={dmse(g.nmse, g.N_F):.4g}, "
                     f"false={false_rate:.1%}, miss={miss_rate:.1%}")
    return tables
