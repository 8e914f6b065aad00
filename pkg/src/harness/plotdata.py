# =========================================
# 📄 File: src/harness/plotdata.py
# Purpose: gnuplot-ready TSVs (one per plot) built from Monte Carlo tables
# =========================================

from pathlib import Path
from typing import Dict, List, Tuple

import pandas as pd

from src.harness.montecarlo import CLUSTER_METHODS, VARIANTS, MonteCarloTables
from src.io_formats import save_table

METHOD_COLUMNS = [f"{cl}_{th}" for cl, th in CLUSTER_METHODS]
DENOISER_COLUMNS = ["mean", "median", "cnn"]


def _wide(long: pd.DataFrame, index: str, columns: List[str], value: str, names: List[str]) -> pd.DataFrame:
    """Pivot a long table into `snr` + one column per method, keeping the SNR sweep order."""
    if long.empty:
        return pd.DataFrame(columns=["snr"] + names)
    key = long[columns].astype(str).agg("_".join, axis=1)
    wide = long.assign(_key=key).pivot(index=index, columns="_key", values=value)
    wide = wide.reindex(index=pd.unique(long[index]), columns=names)
    wide.index.name = "snr"
    return wide.reset_index()


def build_plot_tables(tables: MonteCarloTables) -> Dict[str, Tuple[pd.DataFrame, List[str]]]:
    """name -> (table, header comment lines)."""
    denoise = tables.denoise_table()
    cluster = tables.cluster_table()
    estimation = tables.estimation_table()

    out = {
        "denoise_gain": (_wide(denoise, "snr_db", ["denoiser"], "relative_gain_pct", DENOISER_COLUMNS),
                         ["relative image-equivalent SNR gain (%) vs Rx SNR (dB), per denoiser"]),
        "cm": (_wide(cluster, "snr_db", ["clusterer", "threshold"], "cm_mean", METHOD_COLUMNS),
               ["mean clustering metric CM vs Rx SNR (dB)"]),
        "ae": (_wide(cluster, "snr_db", ["clusterer", "threshold"], "mae", METHOD_COLUMNS),
               ["mean absolute cluster-count error vs Rx SNR (dB)"]),
        "ecm": (_wide(cluster, "snr_db", ["clusterer", "threshold"], "ecm", METHOD_COLUMNS),
                ["effective clustering metric vs Rx SNR (dB): k-means and LGC with energy / percentile threshold"]),
        "dmse": (_wide(estimation, "snr_db", ["variant"], "dmse", list(VARIANTS)),
                 ["denoised MSE of (theta, tau) vs Rx SNR (dB): proposed vs dual wideband without denoising "
                  "vs single wideband"]),
        "gain_nmse": (_wide(estimation, "snr_db", ["variant"], "gain_nmse_mean", list(VARIANTS)),
                      ["NMSE of the complex path gains vs Rx SNR (dB)"]),
    }

    proportions = estimation[estimation.variant.isin(["proposed", "no-denoise"])] if not estimation.empty else estimation
    false_wide = _wide(proportions, "snr_db", ["variant"], "false_rate", ["proposed", "no-denoise"])
    miss_wide = _wide(proportions, "snr_db", ["variant"], "miss_rate", ["proposed", "no-denoise"])
    errors = pd.DataFrame({
        "snr": false_wide["snr"],
        "false_proposed": false_wide["proposed"],
        "false_no_denoise": false_wide["no-denoise"],
        "miss_proposed": miss_wide["proposed"],
        "miss_no_denoise": miss_wide["no-denoise"],
    })
    out["error_proportions"] = (errors, ["proportion of falsely detected and missed paths vs Rx SNR (dB)"])
    return out


def emit_plotdata(tables: MonteCarloTables, output_dir: Path) -> List[Path]:
    """Write one TSV per table; a stage that was not run yields a header-only file."""
    written = []
    for name, (df, header) in build_plot_tables(tables).items():
        path = Path(output_dir) / f"{name}.tsv"
        save_table(df, path, sep="\t", header_lines=header)
        written.append(path)
    return written
