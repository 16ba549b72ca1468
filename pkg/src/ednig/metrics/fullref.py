"""PSNR and SSIM on 8-bit images."""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from ..errors import ContractError

LUMA = np.array([0.299, 0.587, 0.114])
C1 = (0.01 * 255) ** 2
C2 = (0.03 * 255) ** 2


def _as_array(img) -> np.ndarray:
    data = getattr(img, "data", img)
    return np.asarray(data, dtype=np.float64)


def to_gray(img) -> np.ndarray:
    a = _as_array(img)
    if a.ndim == 3 and a.shape[2] == 3:
        return a @ LUMA
    if a.ndim == 3 and a.shape[2] == 1:
        return a[..., 0]
    if a.ndim == 2:
        return a
    raise ContractError(f"cannot convert shape {a.shape} to grayscale")


def psnr(a, b, peak: float = 255.0) -> float:
    """PSNR in dB over all elements; identical inputs give ``inf``."""
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise ContractError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return math.inf
    return float(10.0 * np.log10(peak**2 / mse))


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def _filter_valid(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    r = len(g) // 2
    y = ndimage.correlate1d(x, g, axis=0, mode="constant")
    y = ndimage.correlate1d(y, g, axis=1, mode="constant")
    return y[r:x.shape[0] - r, r:x.shape[1] - r]


def ssim_map(a, b, size: int = 11, sigma: float = 1.5) -> np.ndarray:
    x, y = to_gray(a), to_gray(b)
    if x.shape != y.shape:
        raise ContractError(f"shape mismatch {x.shape} vs {y.shape}")
    if min(x.shape) < size:
        raise ContractError(f"image {x.shape} smaller than the {size}×{size} SSIM window")
    g = gaussian_window(size, sigma)
    mu_x, mu_y = _filter_valid(x, g), _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mu_x * mu_x
    syy = _filter_valid(y * y, g) - mu_y * mu_y
    sxy = _filter_valid(x * y, g) - mu_x * mu_y
    num = (2 * mu_x * mu_y + C1) * (2 * sxy + C2)
    den = (mu_x * mu_x + mu_y * mu_y + C1) * (sxx + syy + C2)
    return num / den


def ssim(a, b, size: int = 11, sigma: float = 1.5) -> float:
    """Mean SSIM of the luma channel (Gaussian window, valid region only)."""
    return float(np.mean(ssim_map(a, b, size, sigma)))
