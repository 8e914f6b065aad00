# tests/unit/test_harness.py
# ------------------------------------------------------------
# Purpose: Typed experiment config, seeded Monte Carlo runner,
#          aggregated tables and plot-data TSVs (src/harness/).
# ------------------------------------------------------------

import pandas as pd
import pytest

from config.config_loader import ConfigError, apply_overrides
from src.harness.experiment import ExperimentConfig, preset
from src.harness.montecarlo import (
    TRIAL_COLUMNS,
    VARIANTS,
    MonteCarloTables,
    run_montecarlo,
    trial_seed,
)
from src.harness.plotdata import METHOD_COLUMNS, emit_plotdata


@pytest.fixture
def tiny(tiny_config_dict):
    return ExperimentConfig.from_dict(tiny_config_dict)


def _read_tsv(path):
    return pd.read_csv(path, sep="\t", comment="#")


def test_presets_convert_to_typed_configs(monkeypatch):
    monkeypatch.delenv("WSG_SEED", raising=False)
    full = preset("paper-full")
    assert full.system.shape == (128, 128)
    assert full.trials == 1000
    smoke = preset("smoke")
    assert smoke.denoiser.depth == 4
    assert smoke.pipeline.clusterer == "lgc"
    assert smoke.path_range == (2, 4)


def test_domain_errors_surface_as_config_errors(tiny_config_dict):
    # 32 subcarriers at 5.8 GHz alias beyond 5.5 ns
    bad = apply_overrides(tiny_config_dict, {"system.subcarriers": 32, "system.delay_spread_s": 8.0e-9})
    with pytest.raises(ConfigError, match="delay aliasing"):
        ExperimentConfig.from_dict(bad)


def test_trial_seeds_are_distinct_and_stable():
    assert trial_seed(11, 0) == trial_seed(11, 0)
    assert len({trial_seed(11, t) for t in range(50)}) == 50
    assert trial_seed(11, 0) != trial_seed(12, 0)


def test_montecarlo_row_counts(tiny):
    tables = run_montecarlo(tiny)
    # 2 trials x 2 SNR points x {mean, median}
    assert len(tables.denoise_trials) == 8
    # ... x 4 threshold/clusterer pairs
    assert len(tables.cluster_trials) == 16
    for variant in VARIANTS:
        trials = tables.estimate_trials[variant]
        assert len(trials) == 4
        assert set(TRIAL_COLUMNS) <= set(trials.columns)

    assert len(tables.denoise_table()) == 4
    assert len(tables.cluster_table()) == 8
    estimation = tables.estimation_table()
    assert len(estimation) == 6
    assert estimation.false_rate.between(0, 1).all()


def test_montecarlo_outputs_do_not_depend_on_workers(tiny, tiny_config_dict, tmp_path):
    serial = run_montecarlo(tiny)
    parallel = run_montecarlo(ExperimentConfig.from_dict(apply_overrides(tiny_config_dict, {"experiment.workers": 2})))
    a = serial.write(tmp_path / "serial")
    b = parallel.write(tmp_path / "parallel")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes(), pa.name

    again = run_montecarlo(tiny).write(tmp_path / "again")
    for pa, pc in zip(a, again):
        assert pa.read_bytes() == pc.read_bytes(), pa.name


def test_cnn_pipeline_needs_weights(tiny_config_dict):
    cfg = ExperimentConfig.from_dict(apply_overrides(tiny_config_dict, {"pipeline.denoiser": "cnn"}))
    with pytest.raises(ValueError, match="denoise-train"):
        run_montecarlo(cfg, stages=("estimate",))
    with pytest.raises(ValueError, match="unknown stages"):
        run_montecarlo(cfg, stages=("plot",))


def test_plot_tables_have_method_columns(tiny, tmp_path):
    tables = run_montecarlo(tiny, stages=("cluster", "estimate"))
    written = {p.name: p for p in emit_plotdata(tables, tmp_path)}

    ecm = _read_tsv(written["ecm.tsv"])
    assert list(ecm.columns) == ["snr"] + METHOD_COLUMNS
    assert ecm.snr.tolist() == [-5, 0]
    assert written["ecm.tsv"].read_text().startswith("# ")

    dmse = _read_tsv(written["dmse.tsv"])
    assert list(dmse.columns) == ["snr", "proposed", "no-denoise", "single-wideband"]
    errors = _read_tsv(written["error_proportions.tsv"])
    assert list(errors.columns) == ["snr", "false_proposed", "false_no_denoise", "miss_proposed", "miss_no_denoise"]

    # denoise stage skipped -> header-only file
    assert len(_read_tsv(written["denoise_gain.tsv"])) == 0


def test_empty_tables_write_header_only_files(tmp_path):
    written = emit_plotdata(MonteCarloTables(), tmp_path)
    assert len(written) == 7
    for path in written:
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# ")
        assert len(lines) == 2
