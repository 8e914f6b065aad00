# tests/unit/test_transform.py
# ------------------------------------------------------------
# Purpose: Unitary 2-D DFT, bin <-> (theta, tau) mapping and
#          rotation diagonals (src/transform.py).
# ------------------------------------------------------------

import numpy as np
import pytest

from src.channel_model import ChannelRealization, PathSignature, synthesize_channel
from src.transform import (
    RotationDiagonal,
    angle_bin_to_theta,
    cut_open,
    delay_bin_to_tau,
    delay_offset_bins,
    dft_matrix,
    fine_offset_grid,
    grid_bins,
    quiet_seam,
    rotation_diag,
    tau_to_delay_bin,
    theta_to_angle_bin,
    to_delay_angle,
    to_space_frequency,
)


def test_dft_matrix_is_unitary():
    F = dft_matrix(12)
    assert np.allclose(F @ F.conj().T, np.eye(12), atol=1e-12)
    assert np.isclose(F[1, 1], np.exp(-2j * np.pi / 12) / np.sqrt(12))


def test_to_delay_angle_matches_matrix_definition(rng):
    H = rng.standard_normal((8, 6)) + 1j * rng.standard_normal((8, 6))
    explicit = dft_matrix(8).conj().T @ H @ dft_matrix(6).conj()
    assert np.allclose(to_delay_angle(H), explicit, atol=1e-12)


def test_round_trip_and_parseval_over_random_channels(rng):
    for _ in range(100):
        H = rng.standard_normal((16, 24)) + 1j * rng.standard_normal((16, 24))
        G = to_delay_angle(H)
        back = to_space_frequency(G)
        assert np.linalg.norm(back - H) / np.linalg.norm(H) < 1e-10
        assert abs(np.linalg.norm(G) ** 2 - np.linalg.norm(H) ** 2) <= 1e-10 * np.linalg.norm(H) ** 2


def test_half_bin_leakage_matches_dirichlet_kernel(narrowband_cfg):
    M, N = narrowband_cfg.shape
    path = PathSignature(theta=(5 + 0.5) / M, tau=3 / narrowband_cfg.bandwidth_hz, alpha=1.0)
    G = to_delay_angle(synthesize_channel(ChannelRealization((path,)), narrowband_cfg))
    energy = np.abs(G) ** 2
    fraction = energy.max() / energy.sum()
    # |sum_r exp(-j pi r / M)|^2 / M^2 = 1 / (M sin(pi / 2M))^2
    expected = 1.0 / (M * np.sin(np.pi / (2 * M))) ** 2
    assert abs(fraction - expected) < 1e-6


def test_bin_mapping_follows_modulo_rules(narrowband_cfg):
    M = narrowband_cfg.antennas
    assert angle_bin_to_theta(M - 1, M) == pytest.approx(-1 / M)
    assert angle_bin_to_theta(M // 2, M) == pytest.approx(-0.5)
    assert theta_to_angle_bin(-1 / M, M) == M - 1
    assert delay_bin_to_tau(4, narrowband_cfg) == pytest.approx(4 / narrowband_cfg.bandwidth_hz)
    assert tau_to_delay_bin(4 / narrowband_cfg.bandwidth_hz, narrowband_cfg) == 4


def test_rotation_diagonal_values_and_limits():
    assert np.allclose(rotation_diag(4, 0.0), 1.0)
    assert np.allclose(rotation_diag(4, 0.25), [1, 1j, -1, -1j])
    with pytest.raises(ValueError, match="exceeds one bin"):
        RotationDiagonal(8, 0.2)


def test_rotation_shifts_an_on_grid_exponential_by_one_bin():
    K, m0 = 16, 3
    x = np.exp(2j * np.pi * np.arange(K) * m0 / K)
    up = np.abs(np.fft.fft(x * rotation_diag(K, 1 / K)))
    down = np.abs(np.fft.fft(x * rotation_diag(K, -1 / K)))
    assert int(np.argmax(up)) == m0 + 1
    assert int(np.argmax(down)) == m0 - 1
    assert up[m0 + 1] == pytest.approx(K)

    # half a bin splits the energy evenly between the two neighbors
    half = np.abs(np.fft.fft(x * rotation_diag(K, 1 / (2 * K))))
    assert half[m0] == pytest.approx(half[m0 + 1])
    assert set(np.argsort(half)[-2:]) == {m0, m0 + 1}


def test_fine_offset_grid_contains_zero_and_spans_half_bin():
    grid = fine_offset_grid(8, 15)
    assert len(grid) == 15
    assert grid[7] == 0.0
    assert grid[0] == pytest.approx(-1 / 16)
    assert grid[-1] == pytest.approx(1 / 16)
    with pytest.raises(ValueError):
        fine_offset_grid(8, 1)


def test_delay_offsets_are_circular(narrowband_cfg):
    f_s = narrowband_cfg.bandwidth_hz
    period = narrowband_cfg.delay_period
    assert delay_offset_bins(2 / f_s, narrowband_cfg) == pytest.approx(2.0)
    assert delay_offset_bins((period - 0.05 / f_s) - 0.05 / f_s, narrowband_cfg) == pytest.approx(-0.1)
    assert delay_offset_bins(-period + 1 / f_s, narrowband_cfg) == pytest.approx(1.0)


def test_cut_open_puts_the_quiet_seam_at_the_origin(rng):
    G = np.ones((6, 8))
    G[4, :] = 0.1  # quietest angle row
    G[:, 2] = 0.2  # quietest delay column
    G[4, 2] = 0.0
    origin = quiet_seam(G)
    assert origin == (4, 2)

    opened = cut_open(G, origin)
    assert opened[0, 0] == 0.0
    assert np.all(opened[0, 1:] == 0.1)
    # cut-open coordinates map back to the uncut bin
    i, j = np.nonzero(cut_open(np.arange(48).reshape(6, 8) == 47, origin))
    assert grid_bins(np.column_stack([i, j]), origin, G.shape).tolist() == [[5, 7]]

    points = rng.integers(0, 6, size=(20, 2)).astype(float)
    back = grid_bins(points, origin, (6, 8))
    assert np.array_equal(back, np.mod(points.astype(int) + [4, 2], [6, 8]))
