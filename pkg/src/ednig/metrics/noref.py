"""No-reference scores: NIQE (distance to a pristine MVG model) and BRISQUE (SVR)."""
from __future__ import annotations

import logging

import numpy as np

from ..errors import ContractError
from .models import BRISQUEModel, NIQEModel, load_brisque_model, load_niqe_model
from .nss import downscale_half_bicubic, float_gray, imresize, local_stats, matlab_gray, nss_features

log = logging.getLogger(__name__)


def brisque_features(img) -> np.ndarray:
    """36 features: 18 NSS statistics at full and half resolution."""
    x = float_gray(img)
    feats = []
    for scale in range(2):
        mu, sigma = local_stats(x, border="zero")
        feats.append(nss_features((x - mu) / (sigma + 1.0), "brisque"))
        if scale == 0:
            x = downscale_half_bicubic(x)
    return np.concatenate(feats)


def brisque_from_features(feats: np.ndarray, model: BRISQUEModel) -> float:
    lo, hi = model.feature_min, model.feature_max
    scaled = -1.0 + 2.0 * (feats - lo) / (hi - lo)
    d2 = np.sum((model.support_vectors - scaled) ** 2, axis=1)
    return float(model.dual_coef @ np.exp(-model.gamma * d2) - model.rho)


def brisque(img, model: BRISQUEModel | None = None) -> float:
    """BRISQUE quality score of a byte-range image (lower is better)."""
    model = model or load_brisque_model()
    return brisque_from_features(brisque_features(img), model)


def niqe_patch_features(img, patch_size: int = 96, sharpness_threshold: float | None = 0.75):
    """Per-patch 36-dim NSS features; optionally keep only the sharpest patches."""
    x = matlab_gray(img)
    rows, cols = x.shape[0] // patch_size, x.shape[1] // patch_size
    if rows * cols < 2:
        raise ContractError(f"image {x.shape} holds fewer than 2 patches of {patch_size}×{patch_size}")
    x = x[:rows * patch_size, :cols * patch_size]
    per_scale = []
    sharpness = None
    for scale in (1, 2):
        mu, sigma = local_stats(x, border="nearest")
        coeffs = (x - mu) / (sigma + 1.0)
        p = patch_size // scale
        blocks = coeffs.reshape(rows, p, cols, p).swapaxes(1, 2).reshape(-1, p, p)
        per_scale.append(np.stack([nss_features(b, "niqe") for b in blocks]))
        if scale == 1:
            sharpness = sigma.reshape(rows, p, cols, p).mean(axis=(1, 3)).ravel()
            x = imresize(x, 0.5)
    feats = np.hstack(per_scale)
    if sharpness_threshold is not None:
        keep = sharpness >= sharpness_threshold * sharpness.max() if sharpness.max() > 0 else None
        if keep is not None and keep.sum() >= 2:
            feats = feats[keep]
        else:
            log.info("fewer than 2 sharp patches; using all %d patches", len(feats))
    return feats


def niqe(img, model: NIQEModel | None = None, select_sharp: bool = False) -> float:
    """NIQE score of a byte-range image (lower is better).

    ``select_sharp`` restricts scoring to patches whose mean local deviation is at
    least ``model.sharpness_threshold`` of the sharpest patch. That selection is
    how the pristine model is fitted; scoring normally uses every patch.
    """
    model = model or load_niqe_model()
    thr = model.sharpness_threshold if select_sharp else None
    feats = niqe_patch_features(img, model.patch_size, thr)
    mu = feats.mean(axis=0)
    cov = np.cov(feats, rowvar=False)
    diff = model.mu - mu
    return float(np.sqrt(diff @ np.linalg.pinv((model.cov + cov) / 2.0) @ diff))
