# tests/unit/test_channel_model.py
# ------------------------------------------------------------
# Purpose: Steering vectors, phase-shift matrix, channel synthesis
#          and random scene generation (src/channel_model.py).
# ------------------------------------------------------------

import numpy as np
import pytest

from src.channel_model import (
    ChannelRealization,
    PathSignature,
    SystemConfig,
    draw_random_scene,
    phase_shift_matrix,
    steering_direction,
    steering_subcarrier,
    synthesize_channel,
)
from src.transform import to_delay_angle


def test_steering_direction_examples():
    assert np.allclose(steering_direction(0.0, 4), np.ones(4))
    assert np.allclose(steering_direction(0.25, 4), [1, -1j, -1, 1j])
    # element r = 5 of theta = 0.3 carries phase -2 pi * 1.5
    assert np.isclose(steering_direction(0.3, 8)[5], np.exp(-2j * np.pi * 1.5))


def test_steering_subcarrier_examples():
    delta = 1.0e6
    assert np.allclose(steering_subcarrier(0.0, 8, delta), np.ones(8))
    one_bin = steering_subcarrier(1 / (4 * delta), 4, delta)
    assert np.allclose(one_bin, np.exp(-1j * np.pi / 2 * np.arange(4)))
    assert np.isclose(steering_subcarrier(3.5 / (8 * delta), 8, delta)[4], np.exp(-3.5j * np.pi))


def test_phase_shift_matrix_values(wideband_cfg):
    assert np.allclose(phase_shift_matrix(0.0, wideband_cfg), 1.0)

    f_c = 58.0e9
    cfg = SystemConfig(carrier_hz=f_c, bandwidth_hz=0.2 * f_c, antennas=128, subcarriers=128, delay_spread_s=1e-9)
    S = phase_shift_matrix(0.4, cfg)
    expected = np.exp(-2j * np.pi * 127 * 127 * (0.2 * f_c / 128) * 0.4 / f_c)
    assert np.isclose(S[127, 127], expected)
    # every entry of d, c and S is unit modulus
    assert np.allclose(np.abs(S), 1.0, atol=1e-12)
    assert np.allclose(np.abs(steering_direction(0.37, 64)), 1.0, atol=1e-12)


def test_phase_shift_matrix_narrowband_limit():
    cfg = SystemConfig(carrier_hz=58.0e9, bandwidth_hz=1.0, antennas=8, subcarriers=8, delay_spread_s=0.0)
    assert np.allclose(phase_shift_matrix(0.45, cfg), 1.0, atol=1e-8)


def test_single_path_at_origin_is_all_ones(wideband_cfg):
    H = synthesize_channel(ChannelRealization((PathSignature(0.0, 0.0, 1.0),)), wideband_cfg)
    assert np.allclose(H, 1.0)


def test_synthesis_is_linear_in_paths(wideband_cfg):
    p1 = PathSignature(0.123, 0.7e-9, 0.4 - 0.2j)
    p2 = PathSignature(-0.31, 1.3e-9, -0.1 + 0.9j)
    both = synthesize_channel(ChannelRealization((p1, p2)), wideband_cfg)
    split = synthesize_channel(ChannelRealization((p1,)), wideband_cfg) + synthesize_channel(
        ChannelRealization((p2,)), wideband_cfg)
    assert np.linalg.norm(both - split) <= 1e-12 * np.linalg.norm(both)


def test_on_grid_path_is_a_single_delay_angle_bin(narrowband_cfg, on_grid_path):
    M, N = narrowband_cfg.shape
    alpha = 0.6 - 0.3j
    path = on_grid_path(narrowband_cfg, -3, 5, alpha)  # negative angle lands in bin M - 3
    H = synthesize_channel(ChannelRealization((path,)), narrowband_cfg)
    G = to_delay_angle(H)

    assert np.isclose(G[M - 3, 5], alpha * np.sqrt(M * N))
    G[M - 3, 5] = 0
    assert np.max(np.abs(G)) < 1e-10
    # Frobenius norm of a single narrowband path is |alpha| sqrt(MN)
    assert np.isclose(np.linalg.norm(H), abs(alpha) * np.sqrt(M * N))


def test_synthesis_rejects_aliased_delay(narrowband_cfg):
    late = PathSignature(0.1, narrowband_cfg.delay_period, 1.0)
    with pytest.raises(ValueError, match="1/Delta"):
        synthesize_channel(ChannelRealization((late,)), narrowband_cfg)


def test_system_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(carrier_hz=1e9, bandwidth_hz=2e9, antennas=8, subcarriers=8, delay_spread_s=0.0)
    with pytest.raises(ValueError, match="delay aliasing"):
        SystemConfig(carrier_hz=58e9, bandwidth_hz=5.8e9, antennas=8, subcarriers=8, delay_spread_s=5e-9)
    cfg = SystemConfig(carrier_hz=58e9, bandwidth_hz=5.8e9, antennas=8, subcarriers=8, delay_spread_s=1e-9)
    assert cfg.subcarrier_spacing * cfg.subcarriers == pytest.approx(cfg.bandwidth_hz)


def test_random_scene_is_deterministic(narrowband_cfg):
    a = draw_random_scene(np.random.default_rng(9), narrowband_cfg)
    b = draw_random_scene(np.random.default_rng(9), narrowband_cfg)
    assert a == b


def test_random_scene_respects_bounds(narrowband_cfg, rng):
    for _ in range(50):
        scene = draw_random_scene(rng, narrowband_cfg)
        assert 2 <= scene.L <= 4
        for p in scene.paths:
            assert -0.5 <= p.theta < 0.5
            assert 0.0 <= p.tau <= narrowband_cfg.delay_spread_s


def test_random_scene_moments(narrowband_cfg, rng):
    draws = [draw_random_scene(rng, narrowband_cfg, path_range=(1, 1), min_separation_bins=0) for _ in range(10_000)]
    phi = np.array([s.paths[0].phi for s in draws])
    # mean of U(-pi/2, pi/2) is 0 with standard error (pi / sqrt(12)) / sqrt(n)
    assert abs(phi.mean()) < 3 * (np.pi / np.sqrt(12)) / np.sqrt(len(phi))
    power = np.array([abs(s.paths[0].alpha) ** 2 for s in draws])
    assert power.mean() == pytest.approx(1.0, abs=0.05)


def test_random_scene_gives_up_when_separation_is_impossible():
    cfg = SystemConfig(carrier_hz=58e9, bandwidth_hz=5.8e9, antennas=16, subcarriers=16, delay_spread_s=2e-9)
    with pytest.raises(RuntimeError, match="separation"):
        draw_random_scene(np.random.default_rng(0), cfg, path_range=(4, 4), min_separation_bins=10, max_attempts=5)


def test_realization_rejects_more_paths_than_l_max():
    paths = tuple(PathSignature(theta=0.1 * i, tau=0.0, alpha=1.0) for i in range(3))
    assert ChannelRealization(paths, max_paths=3).L == 3
    with pytest.raises(ValueError, match="L_max"):
        ChannelRealization(paths, max_paths=2)


def test_random_scene_carries_its_path_limit(narrowband_cfg, rng):
    scene = draw_random_scene(rng, narrowband_cfg, path_range=(1, 3))
    assert scene.max_paths == 3
    assert scene.L <= scene.max_paths
