"""Natural-scene-statistics building blocks shared by NIQE and BRISQUE."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import ndimage, optimize
from scipy.special import gamma as G

from ..errors import ContractError

# Orientation shifts (rows, cols): horizontal, vertical, main and secondary diagonal.
PAIR_SHIFTS = ((0, 1), (1, 0), (1, 1), (-1, 1))
MIN_SAMPLES = 100

_GRID = np.arange(200, 10001) / 1000.0  # shape parameter search grid 0.2 .. 10
_GGD_RATIO = G(1 / _GRID) * G(3 / _GRID) / G(2 / _GRID) ** 2
_AGGD_RATIO = G(2 / _GRID) ** 2 / (G(1 / _GRID) * G(3 / _GRID))
_TINY = 1e-10


def matlab_gray(rgb) -> np.ndarray:
    """Byte-range RGB -> rounded byte-range luma, as classic NR-IQA code expects."""
    a = np.asarray(getattr(rgb, "data", rgb), dtype=np.float64)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[..., 0]
    if a.ndim == 2:
        return a
    if a.ndim != 3 or a.shape[2] != 3:
        raise ContractError(f"expected gray or RGB image, got shape {a.shape}")
    return np.round(a @ np.array([0.298936021293775, 0.587043074451121, 0.114020904255103]))


def float_gray(rgb) -> np.ndarray:
    """Byte-range RGB -> unrounded Rec. 709 luma on the byte scale."""
    a = np.asarray(getattr(rgb, "data", rgb), dtype=np.float64)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[..., 0]
    if a.ndim == 2:
        return a
    if a.ndim != 3 or a.shape[2] != 3:
        raise ContractError(f"expected gray or RGB image, got shape {a.shape}")
    return a @ np.array([0.2125, 0.7154, 0.0721])


def gaussian_kernel(size: int = 7, sigma: float = 7 / 6) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def local_stats(img: np.ndarray, border: str = "nearest"):
    """Gaussian-weighted local mean and deviation (7×7, sigma 7/6)."""
    g = gaussian_kernel()
    mode = {"nearest": "nearest", "zero": "constant"}[border]

    def blur(x):
        return ndimage.correlate1d(ndimage.correlate1d(x, g, 0, mode=mode), g, 1, mode=mode)

    mu = blur(img)
    sigma = np.sqrt(np.abs(blur(img * img) - mu * mu))
    return mu, sigma


def mscn(img, border: str = "nearest", c: float = 1.0) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients of a byte-range gray image."""
    x = np.asarray(getattr(img, "data", img), dtype=np.float64)
    if x.ndim == 3 and x.shape[2] == 1:
        x = x[..., 0]
    if x.ndim != 2:
        raise ContractError(f"mscn expects a single-channel image, got shape {x.shape}")
    mu, sigma = local_stats(x, border)
    return (x - mu) / (sigma + c)


class GGDFit(NamedTuple):
    alpha: float
    sigma: float


class AGGDFit(NamedTuple):
    alpha: float
    sigma_left: float
    sigma_right: float

    @property
    def betas(self) -> tuple[float, float]:
        k = float(np.sqrt(G(1 / self.alpha) / G(3 / self.alpha)))
        return self.sigma_left * k, self.sigma_right * k

    @property
    def mean(self) -> float:
        a = self.alpha
        return float((self.sigma_right - self.sigma_left) * (G(2 / a) / G(1 / a)) * np.sqrt(G(1 / a) / G(3 / a)))


def fit_ggd(samples) -> GGDFit:
    """Symmetric generalized Gaussian fit by moment matching on a fixed grid."""
    v = np.asarray(samples, dtype=np.float64).ravel()
    sigma_sq = np.mean(v * v)
    e = np.mean(np.abs(v))
    if e == 0:
        return GGDFit(2.0, _TINY)
    rho = sigma_sq / e**2
    return GGDFit(float(_GRID[np.argmin(np.abs(rho - _GGD_RATIO))]), float(np.sqrt(sigma_sq)))


def _aggd_phi(alpha):
    return G(2 / alpha) ** 2 / (G(1 / alpha) * G(3 / alpha))


def fit_aggd(samples, solver: str = "grid") -> AGGDFit:
    """Asymmetric generalized Gaussian fit: shape by moment-ratio inversion, side deviations by moments.

    ``grid`` inverts the ratio on a 0.001-spaced lookup table over [0.2, 10] and
    splits samples into strictly negative / strictly positive sides. ``root``
    solves the ratio equation continuously and counts zeros on the right side.
    """
    v = np.asarray(samples, dtype=np.float64).ravel()
    if v.size < MIN_SAMPLES:
        raise ContractError(f"fit_aggd needs at least {MIN_SAMPLES} samples, got {v.size}")
    if solver not in ("grid", "root"):
        raise ContractError(f"unknown solver {solver!r}")
    if not np.any(v):
        return AGGDFit(2.0, _TINY, _TINY)
    neg = v[v < 0]
    pos = v[v >= 0] if solver == "root" else v[v > 0]
    left = np.sqrt(np.mean(neg * neg)) if neg.size else _TINY
    right = np.sqrt(np.mean(pos * pos)) if pos.size else _TINY
    ratio = left / right
    r_hat = np.mean(np.abs(v)) ** 2 / np.mean(v * v)
    r_norm = r_hat * (ratio**3 + 1) * (ratio + 1) / (ratio**2 + 1) ** 2
    if solver == "root":
        f = lambda a: _aggd_phi(a) - r_norm  # noqa: E731
        lo, hi = 0.05, 50.0
        if f(lo) < 0 < f(hi):
            return AGGDFit(float(optimize.brentq(f, lo, hi, xtol=1e-12)), float(left), float(right))
    alpha = _GRID[np.argmin((_AGGD_RATIO - r_norm) ** 2)]
    return AGGDFit(float(alpha), float(left), float(right))


def pair_products(coeffs: np.ndarray, mode: str = "circular"):
    """Products of each coefficient with its neighbour, per orientation.

    ``circular`` wraps at the borders (same size as ``coeffs``); ``crop`` keeps
    only pairs lying inside the image.
    """
    if mode == "circular":
        return [coeffs * np.roll(coeffs, shift, axis=(0, 1)) for shift in PAIR_SHIFTS]
    if mode == "crop":
        c = coeffs
        return [c[:, :-1] * c[:, 1:], c[:-1, :] * c[1:, :], c[:-1, :-1] * c[1:, 1:], c[1:, :-1] * c[:-1, 1:]]
    raise ContractError(f"unknown pair mode {mode!r}")


def nss_features(coeffs: np.ndarray, style: str = "brisque") -> np.ndarray:
    """18 features from MSCN coefficients and their four pairwise products.

    ``brisque``: AGGD (alpha, mean side variance) of the coefficients, then per
    orientation AGGD (alpha, mean, sigma_left^2, sigma_right^2); cropped pairs,
    continuous shape solve.
    ``niqe``: AGGD (alpha, mean scale) of the coefficients, then per orientation
    AGGD (alpha, mean, beta_left, beta_right); circular pairs, grid shape lookup.
    """
    if style == "brisque":
        f = fit_aggd(coeffs, "root")
        feats = [f.alpha, (f.sigma_left**2 + f.sigma_right**2) / 2]
        for prod in pair_products(coeffs, "crop"):
            f = fit_aggd(prod, "root")
            feats += [f.alpha, f.mean, f.sigma_left**2, f.sigma_right**2]
    elif style == "niqe":
        f = fit_aggd(coeffs)
        bl, br = f.betas
        feats = [f.alpha, (bl + br) / 2]
        for prod in pair_products(coeffs):
            f = fit_aggd(prod)
            bl, br = f.betas
            feats += [f.alpha, (br - bl) * G(2 / f.alpha) / G(1 / f.alpha), bl, br]
    else:
        raise ContractError(f"unknown feature style {style!r}")
    return np.array(feats)


def _cubic(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    ax2, ax3 = ax**2, ax**3
    return (1.5 * ax3 - 2.5 * ax2 + 1) * (ax <= 1) + (-0.5 * ax3 + 2.5 * ax2 - 4 * ax + 2) * ((ax > 1) & (ax <= 2))


def _resize_weights(n_in: int, n_out: int, scale: float):
    width = 4.0
    if scale < 1:
        kernel = lambda x: scale * _cubic(scale * x)  # noqa: E731
        width /= scale
    else:
        kernel = _cubic
    u = np.arange(1, n_out + 1) / scale + 0.5 * (1 - 1 / scale)
    left = np.floor(u - width / 2)
    taps = int(np.ceil(width)) + 2
    idx = left[:, None] + np.arange(taps)[None, :]
    w = kernel(u[:, None] - idx)
    w /= w.sum(axis=1, keepdims=True)
    mirror = np.concatenate([np.arange(n_in), np.arange(n_in)[::-1]])
    idx = mirror[np.mod(idx - 1, 2 * n_in).astype(int)]
    keep = np.any(w != 0, axis=0)
    return w[:, keep], idx[:, keep]


def imresize(img: np.ndarray, scale: float) -> np.ndarray:
    """Antialiased bicubic resize of a 2-D array with MATLAB ``imresize`` conventions."""
    out = np.asarray(img, dtype=np.float64)
    for axis in (0, 1):
        n_in = out.shape[axis]
        n_out = int(np.ceil(n_in * scale))
        w, idx = _resize_weights(n_in, n_out, scale)
        moved = np.moveaxis(out, axis, 0)
        res = np.einsum("ok,ok...->o...", w, moved[idx])
        out = np.moveaxis(res, 0, axis)
    return out


def _keys_weight(d: np.ndarray, a: float = -0.75) -> np.ndarray:
    d = np.abs(d)
    return np.where(d <= 1, (a + 2) * d**3 - (a + 3) * d**2 + 1,
                    np.where(d < 2, a * d**3 - 5 * a * d**2 + 8 * a * d - 4 * a, 0.0))


def downscale_half_bicubic(img: np.ndarray) -> np.ndarray:
    """Half-size bicubic resample (Keys a = -0.75, pixel-centre aligned, edge replicate, no antialiasing)."""
    out = np.asarray(img, dtype=np.float64)
    for axis in (0, 1):
        n = out.shape[axis]
        m = max(1, int(np.round(n * 0.5)))
        src = (np.arange(m) + 0.5) * 2.0 - 0.5
        base = np.floor(src).astype(int)
        taps = base[:, None] + np.arange(-1, 3)[None, :]
        w = _keys_weight(src[:, None] - taps)
        idx = np.clip(taps, 0, n - 1)
        moved = np.moveaxis(out, axis, 0)
        out = np.moveaxis(np.einsum("ok,ok...->o...", w, moved[idx]), 0, axis)
    return out
