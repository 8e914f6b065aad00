# =========================================
# 📄 File: src/cli.py
# Purpose: Command-line entry point for the signature-estimation simulator
# - Subcommands: simulate, denoise-train, denoise-eval, cluster-eval, estimate, montecarlo, preset-dump
# - Config = preset/file + named flags + generic --set overrides
# - Exit codes: 0 success, 2 configuration error, 3 runtime error
# =========================================

import os
import sys
import logging
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import yaml

from config.config_loader import (
    CLUSTERERS,
    DENOISERS,
    PRESETS,
    THRESHOLDS,
    ConfigError,
    apply_overrides,
    get_config,
    validate_config,
)
from src.channel_model import ChannelRealization, draw_random_scene, synthesize_channel
from src.denoise.dncnn import DenoiserWeights, load_weights, save_weights
from src.denoise.training import cnn_train, make_training_set
from src.estimation.metrics import evaluate_estimates
from src.estimation.pipeline import estimate_all, make_dataset, run_clusterer, signatures_frame
from src.denoise.apply import denoise_delay_angle
from src.harness.experiment import ExperimentConfig
from src.harness.montecarlo import CLUSTER_METHODS, run_montecarlo, trial_seed_sequence
from src.harness.plotdata import emit_plotdata
from src.io_formats import export_clustering, load_scene, save_matrix, save_scene, save_table
from src.link_sim import apply_channel_awgn, generate_preamble, ls_estimate
from src.transform import to_delay_angle

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


# -----------------------
# CLI interface
# -----------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--preset", choices=PRESETS, help="Named preset (default: $WSG_PRESET or desk)")
    source.add_argument("--config", type=str, help="Path to a YAML config file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="Override any config key (repeatable)")
    common.add_argument("--seed", type=int, help="Master seed (default: $WSG_SEED or the config value)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--snr", type=float, nargs="+", metavar="DB", help="Rx SNR points in dB")
    common.add_argument("--workers", type=int, help="Worker processes for Monte Carlo trials")
    common.add_argument("--lgc-k", type=int, help="LGC neighbor count k")
    common.add_argument("--denoiser", choices=DENOISERS)
    common.add_argument("--threshold", choices=THRESHOLDS)
    common.add_argument("--clusterer", choices=CLUSTERERS)
    common.add_argument("--output-dir", type=str, help="Directory for CSV/TSV/WSG1/WDN1 outputs")
    common.add_argument("--weights", type=str, help="Denoiser weights file (WDN1)")

    p = argparse.ArgumentParser(
        prog="wsg",
        description="Dual-wideband mmWave signature estimation simulator",
    )
    sub = p.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", parents=[common], help="Draw or read a scene, write H and noisy frames")
    sim.add_argument("--scene", type=str, help="Scene file to use instead of a random draw")
    sub.add_parser("denoise-train", parents=[common], help="Train the residual CNN denoiser")
    sub.add_parser("denoise-eval", parents=[common], help="Image-equivalent SNR before/after denoising")
    ce = sub.add_parser("cluster-eval", parents=[common], help="CM / AE / ECM for ET,PT x kmeans,LGC")
    ce.add_argument("--export-clusters", action="store_true",
                    help="Also write i,j,w,label CSVs for the first trial at every SNR")
    est = sub.add_parser("estimate", parents=[common], help="Estimate signatures on one frame")
    est.add_argument("--scene", type=str, help="Scene file to use instead of a random draw")
    sub.add_parser("montecarlo", parents=[common], help="All stages, tables and plot data")
    sub.add_parser("preset-dump", parents=[common], help="Print the resolved configuration")
    return p


def _parse_set(items: List[str]) -> Dict[str, Any]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects SECTION.KEY=VALUE (got {item!r})")
        out[key.strip()] = value.strip()
    return out


def resolve_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Preset/file, then --set overrides, then named flags; validated once at the end."""
    cfg = get_config(preset=args.preset, path=args.config)
    cfg = apply_overrides(cfg, _parse_set(args.overrides))
    cfg = apply_overrides(cfg, {
        "seed": args.seed,
        "experiment.trials": args.trials,
        "experiment.snr_db": args.snr,
        "experiment.workers": args.workers,
        "pipeline.lgc_k": args.lgc_k,
        "pipeline.denoiser": args.denoiser,
        "pipeline.threshold": args.threshold,
        "pipeline.clusterer": args.clusterer,
        "output_dir": args.output_dir,
        "denoiser.weights_path": args.weights,
    })
    validate_config(cfg)
    return cfg


# -----------------------
# Helpers
# -----------------------
def _weights_path(exp: ExperimentConfig) -> Path:
    if not exp.denoiser.weights_path:
        return exp.output_dir / "denoiser.wdn"
    return Path(exp.denoiser.weights_path)


def _load_model(exp: ExperimentConfig, required: bool) -> Optional[DenoiserWeights]:
    path = _weights_path(exp)
    if path.exists():
        return load_weights(path)
    if required:
        raise FileNotFoundError(f"Denoiser weights not found: {path} (run `denoise-train` or pass --denoiser)")
    log.warning(f"No denoiser weights at {path}; CNN rows are skipped")
    return None


def _scene(exp: ExperimentConfig, scene_path: Optional[str], rng: np.random.Generator) -> ChannelRealization:
    if scene_path:
        return ChannelRealization(load_scene(scene_path).paths, max_paths=exp.path_range[1])
    return draw_random_scene(rng, exp.system, exp.path_range, exp.min_separation_bins)


# -----------------------
# Subcommands
# -----------------------
def cmd_simulate(exp: ExperimentConfig, args: argparse.Namespace) -> None:
    rng = np.random.default_rng(trial_seed_sequence(exp.master_seed, 0))
    truth = _scene(exp, args.scene, rng)
    H = synthesize_channel(truth, exp.system)
    preamble = generate_preamble(rng, exp.system.subcarriers)
    save_scene(exp.output_dir / "scene.txt", truth, comment=f"seed {exp.master_seed}")
    save_matrix(exp.output_dir / "H.wsg1", H)
    for s_idx, snr in enumerate(exp.snr_db):
        noise_rng = np.random.default_rng(trial_seed_sequence(exp.master_seed, 0, s_idx))
        frame = apply_channel_awgn(H, preamble, snr, noise_rng)
        save_matrix(exp.output_dir / f"Y_snr{snr:+g}.wsg1", frame.Y)
        save_matrix(exp.output_dir / f"H_ls_snr{snr:+g}.wsg1", ls_estimate(frame, preamble))
    log.info(f"✅ Simulated {truth.L} paths at {len(exp.snr_db)} SNR points -> {exp.output_dir}")


def cmd_denoise_train(exp: ExperimentConfig) -> None:
    tc = exp.training
    rng = np.random.default_rng(tc.seed)
    dataset = make_training_set(rng, exp.system, tc.patch_count, tc.snr_range_db, tc.patch_size,
                                tc.patches_per_frame, exp.path_range, exp.min_separation_bins)
    result = cnn_train(dataset, tc, exp.denoiser.depth, exp.denoiser.channels,
                       exp.denoiser.batch_norm, exp.denoiser.known_variance)
    save_weights(_weights_path(exp), result.weights)
    history = pd.DataFrame({"epoch": np.arange(1, len(result.history) + 1), "loss": result.history})
    save_table(history, exp.output_dir / "training_loss.csv")
    log.info(f"✅ Training finished, final loss {result.final_loss:.6g}")


def cmd_denoise_eval(exp: ExperimentConfig) -> None:
    tables = run_montecarlo(exp, _load_model(exp, required=False), stages=("denoise",))
    tables.write(exp.output_dir)
    emit_plotdata(tables, exp.output_dir)
    for row in tables.denoise_table().itertuples(index=False):
        log.info(f"SNR {row.snr_db:+g} dB {row.denoiser:>6}: BD {row.snr_bd_mean:.4f} dB, "
                 f"AD {row.snr_ad_mean:.4f} dB, gain {row.relative_gain_pct:+.2f}%")


def _export_first_trial_clusters(exp: ExperimentConfig, weights: Optional[DenoiserWeights]) -> None:
    cfg, options = exp.system, exp.pipeline
    rng = np.random.default_rng(trial_seed_sequence(exp.master_seed, 0))
    truth = draw_random_scene(rng, cfg, exp.path_range, exp.min_separation_bins)
    H = synthesize_channel(truth, cfg)
    preamble = generate_preamble(rng, cfg.subcarriers)
    for s_idx, snr in enumerate(exp.snr_db):
        frame = apply_channel_awgn(H, preamble, snr, np.random.default_rng(trial_seed_sequence(exp.master_seed, 0, s_idx)))
        G_D = denoise_delay_angle(to_delay_angle(ls_estimate(frame, preamble)), options.denoiser, weights,
                                  options.filter_size, frame.sigma2)
        for clusterer, threshold in CLUSTER_METHODS:
            variant = options.with_(clusterer=clusterer, threshold=threshold)
            dataset = make_dataset(G_D, variant)
            if len(dataset) == 0:
                continue
            export_clustering(exp.output_dir / "clusters" / f"snr{snr:+g}_{clusterer}_{threshold}.csv",
                              dataset, run_clusterer(dataset, variant))


def cmd_cluster_eval(exp: ExperimentConfig, args: argparse.Namespace) -> None:
    weights = _load_model(exp, required=exp.pipeline.denoiser == "cnn")
    tables = run_montecarlo(exp, weights, stages=("cluster",))
    tables.write(exp.output_dir)
    emit_plotdata(tables, exp.output_dir)
    if args.export_clusters:
        _export_first_trial_clusters(exp, weights)
    for row in tables.cluster_table().itertuples(index=False):
        log.info(f"SNR {row.snr_db:+g} dB {row.clusterer}+{row.threshold}: "
                 f"CM {row.cm_mean:.4g}, MAE {row.mae:.4f}, ECM {row.ecm:.4f}")


def cmd_estimate(exp: ExperimentConfig, args: argparse.Namespace) -> None:
    weights = _load_model(exp, required=exp.pipeline.denoiser == "cnn")
    rng = np.random.default_rng(trial_seed_sequence(exp.master_seed, 0))
    truth = _scene(exp, args.scene, rng)
    H = synthesize_channel(truth, exp.system)
    preamble = generate_preamble(rng, exp.system.subcarriers)
    snr = exp.snr_db[0]
    frame = apply_channel_awgn(H, preamble, snr, np.random.default_rng(trial_seed_sequence(exp.master_seed, 0, 0)))
    result = estimate_all(frame, preamble, exp.system, exp.pipeline, weights)
    save_table(signatures_frame(result), exp.output_dir / "signatures.csv")
    report = evaluate_estimates(truth, result, exp.system, exp.match_gate_bins)
    line = (f"snr={snr:+g} dB L={report.L} L_hat={report.L_hat} N_F={report.N_F} N_miss={report.N_miss} "
            f"nmse={report.nmse:.4g} dmse_term={report.dmse_term:.4g} gain_nmse={report.gain_nmse:.4g}")
    print(line)
    log.info(f"✅ {line}")


def cmd_montecarlo(exp: ExperimentConfig) -> None:
    weights = _load_model(exp, required=exp.pipeline.denoiser == "cnn")
    tables = run_montecarlo(exp, weights)
    written = tables.write(exp.output_dir) + emit_plotdata(tables, exp.output_dir)
    log.info(f"✅ Monte Carlo finished: {len(written)} files in {exp.output_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main execution flow:
    - Parse the subcommand and overrides
    - Resolve and validate the configuration
    - Run the subcommand and map failures to exit codes
    """
    logging.basicConfig(
        level=os.getenv("LOG_LEVEL", "INFO"),
        format="%(asctime)s [%(levelname)s] %(message)s",
    )
    # Parse CLI
    args = build_parser().parse_args(argv)
    try:
        # Load and validate config
        cfg = resolve_config(args)
        logging.getLogger().setLevel(str(cfg["log_level"]).upper())
        if args.command == "preset-dump":
            print(yaml.safe_dump(cfg, sort_keys=False), end="")
            return EXIT_OK
        exp = ExperimentConfig.from_dict(cfg)
    except ConfigError as e:
        log.error(f"❌ Configuration error: {e}")
        return EXIT_CONFIG

    # Dispatch
    try:
        if args.command == "simulate":
            cmd_simulate(exp, args)
        elif args.command == "denoise-train":
            cmd_denoise_train(exp)
        elif args.command == "denoise-eval":
            cmd_denoise_eval(exp)
        elif args.command == "cluster-eval":
            cmd_cluster_eval(exp, args)
        elif args.command == "estimate":
            cmd_estimate(exp, args)
        elif args.command == "montecarlo":
            cmd_montecarlo(exp)
        return EXIT_OK
    except ConfigError as e:
        log.error(f"❌ Configuration error: {e}")
        return EXIT_CONFIG
    except Exception as e:
        log.exception(f"❌ {args.command} failed: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
