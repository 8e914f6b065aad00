# =========================================
# 📄 File: src/harness/experiment.py
# Purpose: Typed view of a loaded YAML config (ExperimentConfig) and named presets
# =========================================

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from config.config_loader import ConfigError, get_config
from src.channel_model import SystemConfig
from src.denoise.training import TrainConfig
from src.estimation.pipeline import PipelineOptions


@dataclass(frozen=True)
class DenoiserSpec:
    depth: int
    channels: int
    batch_norm: bool = True
    known_variance: bool = False
    weights_path: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig
    snr_db: Tuple[float, ...]
    trials: int
    workers: int
    pipeline: PipelineOptions
    denoiser: DenoiserSpec
    training: TrainConfig
    master_seed: int
    output_dir: Path
    path_range: Tuple[int, int] = (2, 4)
    min_separation_bins: float = 2.0
    match_gate_bins: float = 3.0
    log_level: str = "INFO"
    environment: str = "custom"

    @classmethod
    def from_dict(cls, cfg: Dict[str, Any]) -> "ExperimentConfig":
        """Convert a validated config dict; domain-level errors surface as ConfigError."""
        try:
            system = SystemConfig.from_dict(cfg["system"])
            pipeline = PipelineOptions.from_dict(cfg["pipeline"])
            training = TrainConfig.from_dict(cfg["training"])
        except ValueError as e:
            raise ConfigError(f"Invalid configuration: {e}") from e
        d = cfg["denoiser"]
        experiment = cfg["experiment"]
        return cls(
            system=system,
            snr_db=tuple(float(s) for s in experiment["snr_db"]),
            trials=int(experiment["trials"]),
            workers=int(experiment.get("workers", 1)),
            pipeline=pipeline,
            denoiser=DenoiserSpec(int(d["depth"]), int(d["channels"]), bool(d.get("batch_norm", True)),
                                  bool(d.get("known_variance", False)), d.get("weights_path")),
            training=training,
            master_seed=int(cfg["seed"]),
            output_dir=Path(cfg["output_dir"]),
            path_range=(int(cfg["scene"]["min_paths"]), int(cfg["scene"]["max_paths"])),
            min_separation_bins=float(cfg["scene"]["min_separation_bins"]),
            match_gate_bins=float(cfg["pipeline"]["match_gate_bins"]),
            log_level=str(cfg["log_level"]).upper(),
            environment=str(cfg["environment"]),
        )


def preset(name: str) -> ExperimentConfig:
    """paper-full | desk | smoke, loaded from config/<name>.yaml."""
    return ExperimentConfig.from_dict(get_config(preset=name))
