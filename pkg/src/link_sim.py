# =========================================
# 📄 File: src/link_sim.py
# Purpose: One-symbol OFDM/QPSK preamble over the synthesized channel,
#          AWGN at a configured Rx SNR, and the per-entry LS channel estimate
# =========================================

import math
from dataclasses import dataclass

import numpy as np

QPSK_ALPHABET = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / math.sqrt(2)


@dataclass(frozen=True)
class Preamble:
    """Length-N QPSK pilot loaded on every subcarrier; unit modulus per entry."""

    symbols: np.ndarray

    @property
    def N(self) -> int:
        return int(self.symbols.shape[0])


@dataclass(frozen=True)
class ReceivedFrame:
    """Post-demodulation preamble observation Y (M x N) and the injected noise variance."""

    Y: np.ndarray
    sigma2: float
    rx_snr_db: float


def generate_preamble(rng: np.random.Generator, N: int) -> Preamble:
    """i.i.d. uniform QPSK symbols."""
    return Preamble(QPSK_ALPHABET[rng.integers(0, 4, N)])


def noise_variance(H: np.ndarray, rx_snr_db: float) -> float:
    """sigma^2 = P_sig / 10^(snr/10) with P_sig the mean received power per antenna-subcarrier."""
    # Mean received power per entry
    p_sig = float(np.sum(np.abs(H) ** 2)) / H.size
    return p_sig / 10 ** (rx_snr_db / 10)


def apply_channel_awgn(H: np.ndarray, preamble: Preamble, rx_snr_db: float, rng: np.random.Generator) -> ReceivedFrame:
    """Y[r, n] = H[r, n] x[n] + w[r, n], w ~ CN(0, sigma^2) i.i.d."""
    # Shape check
    if H.shape[1] != preamble.N:
        raise ValueError(f"channel has {H.shape[1]} subcarriers but the preamble has {preamble.N}")
    # Circular complex Gaussian noise, sigma2/2 per real dimension
    sigma2 = noise_variance(H, rx_snr_db)
    w = math.sqrt(sigma2 / 2) * (rng.standard_normal(H.shape) + 1j * rng.standard_normal(H.shape))
    return ReceivedFrame(Y=H * preamble.symbols[None, :] + w, sigma2=sigma2, rx_snr_db=float(rx_snr_db))


def ls_estimate(frame: ReceivedFrame, preamble: Preamble) -> np.ndarray:
    """H_hat[r, n] = Y[r, n] / x[n] (a conjugate multiply for unit-modulus pilots)."""
    x = preamble.symbols
    power = np.abs(x) ** 2
    # Zero pilots cannot be divided out
    if np.any(power == 0):
        raise ValueError("preamble contains zero-valued pilot entries; LS division is undefined")
    # Divide each subcarrier column by its pilot
    return frame.Y * (np.conj(x) / power)[None, :]
