# =========================================
# 📄 File: src/denoise/metrics.py
# Purpose: Image-equivalent SNR (before/after denoising) and relative SNR gain
# =========================================

import numpy as np


def image_equivalent_snr(G_clean: np.ndarray, G_test: np.ndarray) -> float:
    """10 log10(||G_C||_F^2 / ||G_test - G_C||_F^2) on magnitude matrices; +inf when identical."""
    clean = np.abs(np.asarray(G_clean))
    test = np.abs(np.asarray(G_test))
    if clean.shape != test.shape:
        raise ValueError(f"shape mismatch: clean {clean.shape} vs test {test.shape}")
    err = float(np.sum((test - clean) ** 2))
    if err == 0.0:
        return float("inf")
    signal = float(np.sum(clean ** 2))
    if signal == 0.0:
        return float("-inf")
    return 10.0 * np.log10(signal / err)


def relative_snr_gain(gamma_bd: float, gamma_ad: float) -> float:
    """(gamma_ad - gamma_bd) / |gamma_bd| * 100; NaN when gamma_bd == 0."""
    if gamma_bd == 0:
        return float("nan")
    return (gamma_ad - gamma_bd) / abs(gamma_bd) * 100.0
