# =========================================
# 📄 File: src/channel_model.py
# Purpose: Dual-wideband space-frequency channel synthesis and random scene generation
# - SystemConfig / PathSignature / ChannelRealization domain types
# - Steering vectors, phase-shift (beam squint) matrix, channel synthesis
# - Seeded random scenes (uniform AoA, truncated-exponential ToA, Rayleigh gains)
# =========================================

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0  # m/s
DELAY_RATE_FACTOR = 3.0  # exponential rate = 3 / tau_max before truncation


@dataclass(frozen=True)
class SystemConfig:
    """
    Carrier, bandwidth and array/subcarrier geometry of one uplink SIMO link.

    The subcarrier spacing and the wavelength are derived, never stored, so
    spacing * N == bandwidth holds by construction.
    """

    carrier_hz: float
    bandwidth_hz: float
    antennas: int
    subcarriers: int
    delay_spread_s: float
    element_spacing_m: Optional[float] = None  # None -> half wavelength
    dual_wideband: bool = True  # False forces S = 1 everywhere

    def __post_init__(self):
        if self.antennas < 1 or self.subcarriers < 1:
            raise ValueError(f"antennas and subcarriers must be >= 1 (got M={self.antennas}, N={self.subcarriers})")
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be > 0 (got {self.bandwidth_hz})")
        if self.carrier_hz <= self.bandwidth_hz:
            raise ValueError(f"carrier_hz must exceed bandwidth_hz (got f_c={self.carrier_hz}, f_s={self.bandwidth_hz})")
        if not 0 <= self.delay_spread_s < self.delay_period:
            raise ValueError(
                f"delay_spread_s must lie in [0, 1/Delta) = [0, {self.delay_period:.4e}) s to avoid delay aliasing "
                f"(got {self.delay_spread_s})"
            )
        if self.element_spacing_m is not None and not 0 < self.element_spacing_m <= self.wavelength / 2:
            raise ValueError("element_spacing_m must lie in (0, lambda_c/2] to avoid spatial aliasing")

    @property
    def subcarrier_spacing(self) -> float:
        """Delta = f_s / N (Hz)."""
        return self.bandwidth_hz / self.subcarriers

    @property
    def delay_period(self) -> float:
        """1 / Delta: delays are only identifiable modulo this period (s)."""
        return self.subcarriers / self.bandwidth_hz

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def spacing(self) -> float:
        return self.element_spacing_m if self.element_spacing_m is not None else self.wavelength / 2

    @property
    def shape(self) -> Tuple[int, int]:
        return self.antennas, self.subcarriers

    @classmethod
    def from_dict(cls, section: Dict[str, Any]) -> "SystemConfig":
        """Build from the `system` section of a loaded YAML config."""
        return cls(
            carrier_hz=float(section["carrier_hz"]),
            bandwidth_hz=float(section["bandwidth_hz"]),
            antennas=int(section["antennas"]),
            subcarriers=int(section["subcarriers"]),
            delay_spread_s=float(section["delay_spread_s"]),
            element_spacing_m=section.get("element_spacing_m"),
            dual_wideband=bool(section.get("dual_wideband", True)),
        )


@dataclass(frozen=True)
class PathSignature:
    """One physical path: spatial frequency theta (cycles/element), delay tau (s), complex gain alpha."""

    theta: float
    tau: float
    alpha: complex
    phi: Optional[float] = None  # physical AoA in rad, reporting only


@dataclass(frozen=True)
class ChannelRealization:
    paths: Tuple[PathSignature, ...]
    max_paths: Optional[int] = field(default=None, compare=False)  # L_max from scene.max_paths

    def __post_init__(self):
        if len(self.paths) < 1:
            raise ValueError("a channel realization needs at least one path")
        if self.max_paths is not None and len(self.paths) > self.max_paths:
            raise ValueError(f"{len(self.paths)} paths exceed L_max = {self.max_paths} (scene.max_paths)")

    @property
    def L(self) -> int:
        return len(self.paths)


def steering_direction(theta: float, M: int) -> np.ndarray:
    """d(theta)[r] = exp(-j 2 pi r theta), r = 0..M-1."""
    r = np.arange(M)
    return np.exp(-2j * np.pi * r * theta)


def steering_subcarrier(tau: float, N: int, delta: float) -> np.ndarray:
    """c(tau)[n] = exp(-j 2 pi n Delta tau), n = 0..N-1."""
    n = np.arange(N)
    return np.exp(-2j * np.pi * n * delta * tau)


def phase_shift_matrix(theta: float, cfg: SystemConfig) -> np.ndarray:
    """Beam-squint matrix S[r, n] = exp(-j 2 pi r n Delta theta / f_c)."""
    r = np.arange(cfg.antennas)[:, None]
    n = np.arange(cfg.subcarriers)[None, :]
    return np.exp(-2j * np.pi * r * n * (cfg.subcarrier_spacing * theta / cfg.carrier_hz))


def path_atom(theta: float, tau: float, cfg: SystemConfig, dual_wideband: Optional[bool] = None) -> np.ndarray:
    """Unit-gain M x N response of one path: d(theta) c(tau)^T, squinted by S(theta) when enabled."""
    atom = np.outer(steering_direction(theta, cfg.antennas),
                    steering_subcarrier(tau, cfg.subcarriers, cfg.subcarrier_spacing))
    use_squint = cfg.dual_wideband if dual_wideband is None else dual_wideband
    if use_squint:
        atom = atom * phase_shift_matrix(theta, cfg)
    return atom


def _check_path(path: PathSignature, cfg: SystemConfig) -> None:
    if not -0.5 <= path.theta < 0.5:
        raise ValueError(f"theta must lie in [-1/2, 1/2) (got {path.theta})")
    if path.tau < 0 or path.tau >= cfg.delay_period:
        raise ValueError(
            f"tau must lie in [0, 1/Delta) = [0, {cfg.delay_period:.4e}) s (got {path.tau}); larger delays alias"
        )


def synthesize_channel(realization: ChannelRealization, cfg: SystemConfig) -> np.ndarray:
    """H = sum_l alpha_l d(theta_l) c^T(tau_l) o S(theta_l), an M x N complex matrix."""
    H = np.zeros(cfg.shape, dtype=complex)
    for path in realization.paths:
        _check_path(path, cfg)
        H += path.alpha * path_atom(path.theta, path.tau, cfg)
    return H


def _truncated_exponential(rng: np.random.Generator, size: int, tau_max: float) -> np.ndarray:
    """Inverse-CDF draw from Exp(rate = 3/tau_max) truncated to [0, tau_max]."""
    if tau_max == 0:
        return np.zeros(size)
    rate = DELAY_RATE_FACTOR / tau_max
    u = rng.uniform(0.0, 1.0, size)
    return -np.log1p(-u * (1.0 - math.exp(-rate * tau_max))) / rate


def _well_separated(thetas: np.ndarray, taus: np.ndarray, cfg: SystemConfig, min_bins: float) -> bool:
    """True when every pair is at least min_bins apart in angle (circularly) and in delay."""
    if min_bins <= 0:
        return True
    angle_bins = thetas * cfg.antennas
    delay_bins = taus * cfg.bandwidth_hz  # tau * N * Delta
    for a in range(len(thetas)):
        for b in range(a + 1, len(thetas)):
            d_angle = abs(angle_bins[a] - angle_bins[b]) % cfg.antennas
            d_angle = min(d_angle, cfg.antennas - d_angle)
            if d_angle < min_bins or abs(delay_bins[a] - delay_bins[b]) < min_bins:
                return False
    return True


def draw_random_scene(
    rng: np.random.Generator,
    cfg: SystemConfig,
    path_range: Sequence[int] = (2, 4),
    min_separation_bins: float = 2.0,
    max_attempts: int = 1000,
) -> ChannelRealization:
    """
    Draw L ~ U{path_range}, phi ~ U(-pi/2, pi/2), tau ~ truncated Exp on [0, tau_max],
    alpha ~ CN(0, 1/L) so that E[sum |alpha|^2] = 1.
    Scenes violating the separation rule are redrawn; deterministic for a seeded rng.
    """
    lo, hi = int(path_range[0]), int(path_range[1])
    if not 1 <= lo <= hi:
        raise ValueError(f"path_range must satisfy 1 <= low <= high (got {path_range})")

    for attempt in range(max_attempts):
        L = int(rng.integers(lo, hi + 1))
        phi = rng.uniform(-np.pi / 2, np.pi / 2, L)
        theta = cfg.spacing * np.sin(phi) / cfg.wavelength
        theta = np.where(theta >= 0.5, theta - 1.0, theta)  # sin(phi) -> 1 edge at d = lambda/2
        tau = _truncated_exponential(rng, L, cfg.delay_spread_s)
        alpha = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / math.sqrt(2 * L)
        if _well_separated(theta, tau, cfg, min_separation_bins):
            if attempt:
                log.debug(f"Scene accepted after {attempt + 1} draws (separation {min_separation_bins} bins)")
            paths = tuple(
                PathSignature(theta=float(t), tau=float(d), alpha=complex(a), phi=float(p))
                for t, d, a, p in zip(theta, tau, alpha, phi)
            )
            return ChannelRealization(paths, max_paths=hi)

    raise RuntimeError(
        f"Could not draw a scene with {min_separation_bins}-bin separation in {max_attempts} attempts; "
        "reduce scene.min_separation_bins or the path count"
    )
