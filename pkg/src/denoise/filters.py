# =========================================
# 📄 File: src/denoise/filters.py
# Purpose: Classical k x k mean / median filters on CIR images (reflect padding)
# =========================================

import numpy as np
from scipy import ndimage


def _check_window(k: int) -> None:
    if k < 3 or k % 2 == 0:
        raise ValueError(f"filter window must be an odd integer >= 3 (got {k})")


def mean_filter(img: np.ndarray, k: int = 3) -> np.ndarray:
    _check_window(k)
    return ndimage.uniform_filter(np.asarray(img, dtype=float), size=k, mode="reflect")


def median_filter(img: np.ndarray, k: int = 3) -> np.ndarray:
    _check_window(k)
    return ndimage.median_filter(np.asarray(img, dtype=float), size=k, mode="reflect")
