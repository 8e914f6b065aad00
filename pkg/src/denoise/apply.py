# =========================================
# 📄 File: src/denoise/apply.py
# Purpose: Run one denoiser on a delay-angle CIR and return back-mapped magnitudes
# =========================================

import math
from typing import Optional, Union

import numpy as np

from src.denoise.dncnn import DenoiserWeights, ResidualDenoiser, cnn_forward
from src.denoise.filters import mean_filter, median_filter
from src.denoise.image_equivalent import ImageEquivalent, from_image, to_image

DenoiserModel = Union[DenoiserWeights, ResidualDenoiser]


def denoise_delay_angle(
    G_hat: np.ndarray,
    method: str,
    model: Optional[DenoiserModel] = None,
    filter_size: int = 3,
    sigma2: Optional[float] = None,
) -> np.ndarray:
    """
    normalize -> denoise the magnitude image -> map back with the same record.
    method: none | mean | median | cnn. Phases are never touched.
    sigma2 is the per-entry complex noise variance (needed by known-variance nets).
    """
    if method == "none":
        return np.abs(G_hat)
    imgeq = to_image(G_hat)
    if imgeq.norm.degenerate:
        return from_image(imgeq)

    if method == "mean":
        img = mean_filter(imgeq.img, filter_size)
    elif method == "median":
        img = median_filter(imgeq.img, filter_size)
    elif method == "cnn":
        if model is None:
            raise ValueError("denoiser 'cnn' needs trained weights (see `denoise-train`)")
        level = None
        if sigma2 is not None:
            level = math.sqrt(sigma2) / imgeq.norm.span  # unitary transform keeps the per-entry variance
        img = imgeq.img - cnn_forward(imgeq.img, model, noise_level=level)
    else:
        raise ValueError(f"unknown denoiser '{method}' (expected none, mean, median or cnn)")
    return from_image(ImageEquivalent(img=img, norm=imgeq.norm))
