# =========================================
# 📄 File: config/config_loader.py
# Purpose: Load YAML experiment presets, substitute ${ENV_VARS}, validate, and expose helpers
# =========================================

import os                      # Used to read env vars when resolving ${VAR} placeholders
import re                      # Used to find and replace ${VAR} patterns inside YAML text
import copy                    # Deep copies so overrides never mutate a loaded preset
from pathlib import Path       # Locate config/ relative to this file, not the CWD
from typing import Any, Dict, Iterable, List

import yaml                    # Safe YAML parsing (install: PyYAML)
from dotenv import load_dotenv  # Optional .env support (WSG_SEED, LOG_LEVEL, ...)

CONFIG_DIR = Path(__file__).resolve().parent
PRESETS = ("paper-full", "desk", "smoke")

DENOISERS = ("none", "mean", "median", "cnn")
THRESHOLDS = ("et", "pt")
CLUSTERERS = ("lgc", "kmeans")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class ConfigError(ValueError):
    """Raised when a configuration file or override is invalid (CLI exit code 2)."""


def _substitute_env_placeholders(yaml_text: str) -> str:
    """
    Replace ${VAR} and ${VAR:-default} placeholders in YAML text with environment values.
    A missing variable without default becomes <MISSING:VAR> so validation fails cleanly.
    """
    pattern = re.compile(r"\$\{([^}^{:]+)(?::-([^}]*))?\}")

    def repl(match):
        var_name = match.group(1).strip()                       # Extract VAR from ${VAR...}
        default = match.group(2)                                 # Optional default after ':-'
        value = os.getenv(var_name)
        if value is not None and value != "":
            return value
        if default is not None:
            return default
        return f"<MISSING:{var_name}>"                           # Sentinel, caught by validation

    return pattern.sub(repl, yaml_text)


def _load_yaml_file(path: Path) -> Dict[str, Any]:
    """
    Read a YAML file from disk, perform ${VAR} substitution, and parse it to a dict.
    """
    if not path.exists():
        raise ConfigError(f"Configuration file not found: {path}")

    load_dotenv(override=False)                                  # .env never beats the real environment
    raw = path.read_text(encoding="utf-8")
    substituted = _substitute_env_placeholders(raw)

    try:
        cfg = yaml.safe_load(substituted)
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML parsing error in {path}: {e}") from e

    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return cfg


def _find_missing_placeholders(node: Any, prefix: str = "") -> List[str]:
    """Walk the parsed tree and list every key whose value still carries <MISSING:...>."""
    found = []
    if isinstance(node, dict):
        for k, v in node.items():
            found += _find_missing_placeholders(v, f"{prefix}{k}.")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            found += _find_missing_placeholders(v, f"{prefix}{i}.")
    elif "MISSING:" in str(node):
        found.append(prefix.rstrip("."))
    return found


def _check_number(errors: List[str], section: Dict[str, Any], key: str, name: str,
                  minimum: float = None, integer: bool = False) -> None:
    value = section.get(key)
    kinds = (int,) if integer else (int, float)
    if isinstance(value, bool) or not isinstance(value, kinds):
        errors.append(f"{name} must be {'an integer' if integer else 'a number'} (got {value!r})")
        return
    if minimum is not None and value < minimum:
        errors.append(f"{name} must be >= {minimum} (got {value!r})")


def _check_choice(errors: List[str], section: Dict[str, Any], key: str, name: str,
                  choices: Iterable[str]) -> None:
    value = section.get(key)
    if value not in choices:
        errors.append(f"{name} must be one of {list(choices)} (got {value!r})")


def validate_config(cfg: Dict[str, Any]) -> None:
    """
    Validate presence of required keys, value ranges and enumerations.
    Collects every problem first so a single run reports all offenders.
    """
    required_top = ["environment", "log_level", "seed", "output_dir",
                    "system", "scene", "experiment", "pipeline", "denoiser", "training"]
    missing_top = [k for k in required_top if k not in cfg or cfg[k] in (None, "")]
    if missing_top:
        raise ConfigError(f"Missing top-level config keys: {', '.join(missing_top)}")

    unresolved = _find_missing_placeholders(cfg)
    if unresolved:
        raise ConfigError(f"Unresolved ${{VAR}} placeholders in: {', '.join(unresolved)}")

    errors: List[str] = []
    if str(cfg["log_level"]).upper() not in LOG_LEVELS:
        errors.append(f"log_level must be one of {list(LOG_LEVELS)}")
    _check_number(errors, cfg, "seed", "seed", minimum=0, integer=True)

    system = cfg["system"]
    _check_number(errors, system, "carrier_hz", "system.carrier_hz", minimum=0)
    _check_number(errors, system, "bandwidth_hz", "system.bandwidth_hz", minimum=0)
    _check_number(errors, system, "antennas", "system.antennas", minimum=1, integer=True)
    _check_number(errors, system, "subcarriers", "system.subcarriers", minimum=1, integer=True)
    _check_number(errors, system, "delay_spread_s", "system.delay_spread_s", minimum=0)

    scene = cfg["scene"]
    _check_number(errors, scene, "min_paths", "scene.min_paths", minimum=1, integer=True)
    _check_number(errors, scene, "max_paths", "scene.max_paths", minimum=1, integer=True)
    _check_number(errors, scene, "min_separation_bins", "scene.min_separation_bins", minimum=0)
    if not errors and scene["min_paths"] > scene["max_paths"]:
        errors.append("scene.min_paths must not exceed scene.max_paths")

    experiment = cfg["experiment"]
    _check_number(errors, experiment, "trials", "experiment.trials", minimum=1, integer=True)
    _check_number(errors, experiment, "workers", "experiment.workers", minimum=1, integer=True)
    snrs = experiment.get("snr_db")
    if not isinstance(snrs, list) or not snrs or not all(
            isinstance(s, (int, float)) and not isinstance(s, bool) for s in snrs):
        errors.append("experiment.snr_db must be a non-empty list of numbers")

    pipeline = cfg["pipeline"]
    _check_choice(errors, pipeline, "denoiser", "pipeline.denoiser", DENOISERS)
    _check_choice(errors, pipeline, "threshold", "pipeline.threshold", THRESHOLDS)
    _check_choice(errors, pipeline, "clusterer", "pipeline.clusterer", CLUSTERERS)
    _check_number(errors, pipeline, "lgc_k", "pipeline.lgc_k", minimum=3, integer=True)
    _check_number(errors, pipeline, "kmeans_k_max", "pipeline.kmeans_k_max", minimum=2, integer=True)
    _check_number(errors, pipeline, "rotation_levels_m", "pipeline.rotation_levels_m", minimum=2, integer=True)
    _check_number(errors, pipeline, "rotation_levels_n", "pipeline.rotation_levels_n", minimum=2, integer=True)
    _check_number(errors, pipeline, "filter_size", "pipeline.filter_size", minimum=3, integer=True)
    _check_number(errors, pipeline, "match_gate_bins", "pipeline.match_gate_bins", minimum=0)
    percentile = pipeline.get("percentile")
    if isinstance(percentile, bool) or not isinstance(percentile, (int, float)) or not 0 < percentile < 100:
        errors.append(f"pipeline.percentile must lie in (0, 100) (got {percentile!r})")

    denoiser = cfg["denoiser"]
    _check_number(errors, denoiser, "depth", "denoiser.depth", minimum=2, integer=True)
    _check_number(errors, denoiser, "channels", "denoiser.channels", minimum=1, integer=True)

    training = cfg["training"]
    for key in ("patch_size", "patch_count", "epochs", "batch_size", "seed"):
        _check_number(errors, training, key, f"training.{key}", minimum=0 if key == "seed" else 1, integer=True)
    _check_number(errors, training, "learning_rate", "training.learning_rate", minimum=0)
    snr_range = training.get("snr_range_db")
    if not isinstance(snr_range, list) or len(snr_range) != 2 or snr_range[0] > snr_range[1]:
        errors.append("training.snr_range_db must be [low, high] with low <= high")

    if errors:
        raise ConfigError("Invalid configuration: " + "; ".join(errors))


def _coerce_scalar(text: str) -> Any:
    """Parse an override value with YAML rules ('3' -> 3, 'true' -> True, '[1, 2]' -> list)."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse override value {text!r}: {e}") from e


def apply_overrides(cfg: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """
    Return a copy of cfg with dotted-key overrides applied, e.g. {"pipeline.lgc_k": 6}.
    String values are parsed with YAML rules so CLI text behaves like file content.
    """
    out = copy.deepcopy(cfg)
    for dotted, value in overrides.items():
        if value is None:
            continue                                             # Flag not given on the CLI
        keys = dotted.split(".")
        node = out
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                raise ConfigError(f"Unknown config section in override: {dotted}")
            node = node[key]
        if keys[-1] not in node:
            raise ConfigError(f"Unknown config key in override: {dotted}")
        node[keys[-1]] = _coerce_scalar(value) if isinstance(value, str) else value
    return out


def load_config(path: Path) -> Dict[str, Any]:
    """Load, substitute and validate one YAML config file."""
    cfg = _load_yaml_file(Path(path))
    validate_config(cfg)
    return cfg


def get_config(preset: str = None, path: str = None) -> Dict[str, Any]:
    """
    Public API: pick a preset (default from WSG_PRESET, else 'desk') or an explicit file,
    load YAML, validate, return dict.
    """
    if path:
        return load_config(Path(path))
    name = (preset or os.getenv("WSG_PRESET", "desk")).lower()
    if name not in PRESETS:
        raise ConfigError(f"Unknown preset '{name}' (expected one of {list(PRESETS)})")
    return load_config(CONFIG_DIR / f"{name}.yaml")
