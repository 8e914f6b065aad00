# tests/conftest.py
# ------------------------------------------------------------
# Purpose: Shared fixtures: small system configs (narrowband and
# dual-wideband), seeded generators, on-grid path factories and a
# shrunken copy of the smoke preset for harness/CLI tests.
# ------------------------------------------------------------

import numpy as np
import pytest

from config.config_loader import apply_overrides, get_config
from src.channel_model import PathSignature, SystemConfig
from src.transform import wrap_theta

F_C = 58.0e9


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def narrowband_cfg():
    # S forced to all-ones: on-grid paths are exact single DFT bins
    return SystemConfig(carrier_hz=F_C, bandwidth_hz=0.1 * F_C, antennas=32, subcarriers=32,
                        delay_spread_s=4.0e-9, dual_wideband=False)


@pytest.fixture
def wideband_cfg():
    # f_s = 0.2 f_c, beam squint clearly visible
    return SystemConfig(carrier_hz=F_C, bandwidth_hz=0.2 * F_C, antennas=32, subcarriers=32,
                        delay_spread_s=2.0e-9)


@pytest.fixture
def on_grid_path():
    """Factory: path sitting exactly on angle bin p and delay bin q."""
    def make(cfg: SystemConfig, p: int, q: int, alpha: complex = 1.0) -> PathSignature:
        return PathSignature(theta=float(wrap_theta(p / cfg.antennas)), tau=q / cfg.bandwidth_hz, alpha=complex(alpha))
    return make


@pytest.fixture
def tiny_config_dict(monkeypatch, tmp_path):
    """Smoke preset shrunk to 16 x 16, two trials, two SNR points, median denoiser."""
    monkeypatch.delenv("WSG_SEED", raising=False)
    cfg = get_config(preset="smoke")
    return apply_overrides(cfg, {
        "system.antennas": 16,
        "system.subcarriers": 16,
        "system.delay_spread_s": 2.0e-9,
        "experiment.trials": 2,
        "experiment.snr_db": [-5, 0],
        "experiment.workers": 1,
        "pipeline.denoiser": "median",
        "output_dir": str(tmp_path / "out"),
        "denoiser.weights_path": str(tmp_path / "out" / "denoiser.wdn"),
    })
