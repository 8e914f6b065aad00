# =========================================
# 📄 File: src/denoise/image_equivalent.py
# Purpose: Map a delay-angle CIR to its [0, 1] magnitude image and back
# =========================================

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImageNormalization:
    """Record needed to undo the min-max normalization exactly."""

    scale: float  # max magnitude
    offset: float  # min magnitude
    degenerate: bool = False  # constant magnitudes -> all-zero image

    @property
    def span(self) -> float:
        return self.scale - self.offset


@dataclass(frozen=True)
class ImageEquivalent:
    img: np.ndarray
    norm: ImageNormalization


def normalization_of(magnitudes: np.ndarray) -> ImageNormalization:
    magnitudes = np.asarray(magnitudes, dtype=float)
    if not np.all(np.isfinite(magnitudes)):
        raise ValueError("CIR contains non-finite entries")
    hi, lo = float(magnitudes.max()), float(magnitudes.min())
    return ImageNormalization(scale=hi, offset=lo, degenerate=hi == lo)


def apply_normalization(magnitudes: np.ndarray, norm: ImageNormalization) -> np.ndarray:
    """(|G| - offset) / span under a given record; values may leave [0, 1] for a foreign record."""
    magnitudes = np.asarray(magnitudes, dtype=float)
    if norm.degenerate:
        return np.zeros_like(magnitudes)
    return (magnitudes - norm.offset) / norm.span


def to_image(G: np.ndarray) -> ImageEquivalent:
    """Min-max normalize |G| into [0, 1]; constant |G| gives an all-zero image flagged degenerate."""
    magnitudes = np.abs(G)
    norm = normalization_of(magnitudes)
    if norm.degenerate:
        log.warning(f"Constant-magnitude CIR ({norm.scale:.4g}); image is all zeros")
    return ImageEquivalent(img=apply_normalization(magnitudes, norm), norm=norm)


def from_image(imgeq: ImageEquivalent) -> np.ndarray:
    """Back-map an (optionally denoised) image to CIR magnitudes with its stored record."""
    norm = imgeq.norm
    if norm.degenerate:
        return np.full(np.shape(imgeq.img), norm.offset, dtype=float)
    return np.asarray(imgeq.img, dtype=float) * norm.span + norm.offset
