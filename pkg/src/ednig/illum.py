"""Illumination guidance: bright-channel estimate refined by a guided filter."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ContractError
from .imgio import ImageTensor, to_unit

LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class IlluminationParams:
    patch_size: int = 15
    gf_radius: int = 40
    gf_epsilon: float = 1e-3

    def __post_init__(self):
        if self.patch_size < 1 or self.patch_size % 2 == 0:
            raise ContractError(f"patch_size must be odd and >= 1, got {self.patch_size}")
        if self.gf_radius < 1:
            raise ContractError(f"gf_radius must be >= 1, got {self.gf_radius}")
        if not self.gf_epsilon > 0:
            raise ContractError(f"gf_epsilon must be > 0, got {self.gf_epsilon}")


@dataclass(frozen=True)
class IlluminationMap:
    data: np.ndarray  # H×W, float32, [0, 1]
    refined: bool = False


def _unit_rgb(img) -> np.ndarray:
    if isinstance(img, ImageTensor):
        if img.range_tag != "unit":
            raise ContractError(f"expected a unit-range image, got {img.range_tag}")
        img = img.data
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ContractError(f"expected an H×W×3 RGB image, got shape {img.shape}")
    return img


def grayscale(img) -> np.ndarray:
    """Luma (0.299, 0.587, 0.114) of a unit-range RGB image, float64."""
    return _unit_rgb(img).astype(np.float64) @ LUMA


def bright_channel(img, patch_size: int = 15) -> IlluminationMap:
    """Per-pixel channel max, dilated with a square window (edges clamped)."""
    rgb = _unit_rgb(img)
    if patch_size < 1 or patch_size % 2 == 0:
        raise ContractError(f"patch_size must be odd and >= 1, got {patch_size}")
    cmax = rgb.max(axis=2)
    out = ndimage.maximum_filter(cmax, size=patch_size, mode="nearest")
    return IlluminationMap(out.astype(np.float32), refined=False)


def box_mean(x: np.ndarray, radius: int) -> np.ndarray:
    # Half-sample symmetric extension keeps the filter mass-preserving.
    return ndimage.uniform_filter(x, size=2 * radius + 1, mode="reflect")


def guided_filter(guide, src, radius: int = 40, epsilon: float = 1e-3) -> IlluminationMap:
    """Edge-preserving smoothing of ``src`` steered by a single-channel ``guide``."""
    if isinstance(guide, ImageTensor):
        guide = guide.data[..., 0] if guide.channels == 1 else None
        if guide is None:
            raise ContractError("guide must be single-channel")
    p = src.data if isinstance(src, IlluminationMap) else np.asarray(src)
    I = np.asarray(guide, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if I.shape != p.shape or I.ndim != 2:
        raise ContractError(f"guide {I.shape} and src {p.shape} must be equal H×W")
    if not epsilon > 0:
        raise ContractError("epsilon must be > 0")
    mean_I = box_mean(I, radius)
    mean_p = box_mean(p, radius)
    cov_Ip = box_mean(I * p, radius) - mean_I * mean_p
    var_I = box_mean(I * I, radius) - mean_I * mean_I
    a = cov_Ip / (var_I + epsilon)
    b = mean_p - a * mean_I
    q = box_mean(a, radius) * I + box_mean(b, radius)
    return IlluminationMap(np.clip(q, 0.0, 1.0).astype(np.float32), refined=True)


def illumination_map(img, params: IlluminationParams = IlluminationParams()) -> IlluminationMap:
    rgb = _unit_rgb(img)
    coarse = bright_channel(rgb, params.patch_size)
    return guided_filter(grayscale(rgb), coarse, params.gf_radius, params.gf_epsilon)


def four_channel_input(low: ImageTensor, params: IlluminationParams = IlluminationParams()) -> np.ndarray:
    """Stack signed-range RGB with the signed-range illumination map: H×W×4 float32."""
    unit = to_unit(low).data
    m = illumination_map(unit, params).data
    stacked = np.concatenate([unit, m[..., None]], axis=2)
    return (stacked * 2.0 - 1.0).astype(np.float32)
