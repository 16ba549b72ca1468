"""Synthetic low-light pairs in the LOL folder layout, for smoke runs without the real data."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

from .imgio import LOL_SPLITS, ImageTensor, PairedSample, resize_bilinear, write_png


def darken(target: ImageTensor, seed: int, gain: float = 0.12, gamma: float = 1.4,
           noise_std: float = 2.0) -> ImageTensor:
    """Byte-range low-light rendition: exposure drop, gamma, sensor noise, 8-bit quantization."""
    x = np.asarray(target.data, dtype=np.float64) / 255.0
    low = gain * x**gamma * 255.0
    low += np.random.default_rng(seed).normal(0.0, noise_std, size=low.shape)
    return ImageTensor(np.clip(np.rint(low), 0, 255), "byte")


def make_pairs(images: Iterable[np.ndarray], size: tuple[int, int] = (128, 192), seed: int = 0,
               prefix: str = "toy") -> list[PairedSample]:
    """Resize RGB uint8 arrays to ``size`` (H, W) and pair each with a darkened copy."""
    pairs = []
    for i, img in enumerate(images):
        arr = np.asarray(img)
        if arr.ndim == 2:
            arr = np.repeat(arr[..., None], 3, axis=2)
        arr = arr[..., :3].astype(np.float32)
        target = ImageTensor(np.clip(np.rint(resize_bilinear(arr, size)), 0, 255), "byte")
        pairs.append(PairedSample(darken(target, seed + i), target, f"{prefix}{i:03d}"))
    return pairs


def write_lol_layout(root, train: list[PairedSample], val: list[PairedSample] = ()) -> Path:
    """Write pairs as ``our485/{low,high}`` and ``eval15/{low,high}`` PNG folders."""
    root = Path(root)
    for split, pairs in (("train", train), ("val", val)):
        for sub in ("low", "high"):
            (root / LOL_SPLITS[split] / sub).mkdir(parents=True, exist_ok=True)
        for p in pairs:
            write_png(root / LOL_SPLITS[split] / "low" / f"{p.id}.png", p.low)
            write_png(root / LOL_SPLITS[split] / "high" / f"{p.id}.png", p.target)
    return root
