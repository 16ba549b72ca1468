"""Image/dataset I/O, value-range conversion and paired augmentation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from .errors import ContractError, DatasetLayoutError, PairingError

log = logging.getLogger(__name__)

RANGES = {"unit": (0.0, 1.0), "signed": (-1.0, 1.0), "byte": (0.0, 255.0)}
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
LOL_SPLITS = {"train": "our485", "val": "eval15"}


@dataclass(frozen=True)
class ImageTensor:
    """H×W×C float32 image tagged with its value range."""

    data: np.ndarray
    range_tag: str = "byte"

    def __post_init__(self):
        if self.range_tag not in RANGES:
            raise ContractError(f"unknown range_tag {self.range_tag!r}")
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[..., None]
        if data.ndim != 3 or data.shape[2] not in (1, 3, 4):
            raise ContractError(f"expected H×W×C with C in (1, 3, 4), got shape {data.shape}")
        data = np.ascontiguousarray(data, dtype=np.float32)
        lo, hi = RANGES[self.range_tag]
        if data.size and (data.min() < lo or data.max() > hi):
            raise ContractError(
                f"values [{data.min()}, {data.max()}] outside {self.range_tag} range [{lo}, {hi}]"
            )
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class PairedSample:
    low: ImageTensor
    target: ImageTensor
    id: str

    def __post_init__(self):
        if self.low.data.shape[:2] != self.target.data.shape[:2]:
            raise ContractError(
                f"pair {self.id!r}: low {self.low.data.shape[:2]} vs target {self.target.data.shape[:2]}"
            )


@dataclass(frozen=True)
class AugmentationParams:
    flip_prob: float = 0.5
    crop_scale_range: tuple[float, float] = (0.8, 1.0)
    output_size: tuple[int, int] = (512, 512)
    seed: int = 0

    def __post_init__(self):
        h, w = self.output_size
        if h % 16 or w % 16:
            raise ContractError(f"output_size {self.output_size} must be divisible by 16")
        lo, hi = self.crop_scale_range
        if not 0 < lo <= hi <= 1:
            raise ContractError(f"bad crop_scale_range {self.crop_scale_range}")


def _require(img: ImageTensor, tag: str):
    if img.range_tag != tag:
        raise ContractError(f"expected a {tag}-range image, got {img.range_tag}")


def normalize(img: ImageTensor) -> ImageTensor:
    """byte [0, 255] -> signed [-1, 1]."""
    _require(img, "byte")
    return ImageTensor(np.clip(img.data / 127.5 - 1.0, -1.0, 1.0), "signed")


def denormalize(img: ImageTensor) -> ImageTensor:
    """signed [-1, 1] -> byte [0, 255], clamped. Not rounded; see :func:`to_uint8`."""
    _require(img, "signed")
    return ImageTensor(np.clip((img.data.astype(np.float64) + 1.0) * 127.5, 0.0, 255.0), "byte")


def to_unit(img: ImageTensor) -> ImageTensor:
    scale = {"unit": (1.0, 0.0), "byte": (1 / 255.0, 0.0), "signed": (0.5, 0.5)}[img.range_tag]
    return ImageTensor(np.clip(img.data * scale[0] + scale[1], 0.0, 1.0), "unit")


def to_uint8(img: ImageTensor) -> np.ndarray:
    _require(img, "byte")
    return np.rint(img.data).astype(np.uint8)


def read_image(path) -> ImageTensor:
    """Read an 8-bit image as a byte-range RGB (or single-channel) ImageTensor."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.float32)
    return ImageTensor(arr, "byte")


def write_png(path, img: ImageTensor | np.ndarray) -> None:
    if isinstance(img, ImageTensor):
        if img.range_tag != "byte":
            img = ImageTensor(to_unit(img).data * 255.0, "byte")
        arr = to_uint8(img)
    else:
        arr = np.asarray(img)
        if arr.dtype != np.uint8:
            raise ContractError("raw arrays passed to write_png must be uint8")
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[..., 0]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    Image.fromarray(arr).save(tmp, format="PNG")
    tmp.replace(path)


def list_images(folder) -> list[Path]:
    folder = Path(folder)
    return sorted(p for p in folder.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file())


def load_lol_dataset(root, split: str = "train", limit: int | None = None) -> list[PairedSample]:
    """Load LOL pairs from ``root/{our485,eval15}/{low,high}``, sorted by filename."""
    if split not in LOL_SPLITS:
        raise ContractError(f"split must be one of {sorted(LOL_SPLITS)}, got {split!r}")
    base = Path(root) / LOL_SPLITS[split]
    low_dir, high_dir = base / "low", base / "high"
    for d in (low_dir, high_dir):
        if not d.is_dir():
            raise DatasetLayoutError(
                f"missing directory {d}; expected {Path(root)}/{{our485,eval15}}/{{low,high}}/"
            )
    lows = {p.name: p for p in list_images(low_dir)}
    highs = {p.name: p for p in list_images(high_dir)}
    orphans = sorted(set(lows) ^ set(highs))
    if orphans:
        where = "low" if orphans[0] in lows else "high"
        raise PairingError(f"{orphans[0]} in {where}/ has no counterpart ({len(orphans)} unmatched)")
    names = sorted(lows)
    if limit is not None:
        names = names[:limit]
    samples = []
    for name in names:
        low, high = read_image(lows[name]), read_image(highs[name])
        if low.channels != 3 or high.channels != 3:
            raise ContractError(f"{name}: expected RGB images")
        samples.append(PairedSample(low, high, Path(name).stem))
    return samples


def resize_bilinear(arr: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """H×W×C float32 bilinear resize (half-pixel centres, no antialiasing)."""
    if arr.shape[:2] == tuple(size):
        return arr.copy()
    t = torch.from_numpy(np.ascontiguousarray(arr.transpose(2, 0, 1)))[None]
    out = F.interpolate(t, size=tuple(size), mode="bilinear", align_corners=False)
    return out[0].numpy().transpose(1, 2, 0).copy()


def sample_crop_window(rng: np.random.Generator, height: int, width: int, params: AugmentationParams):
    """Draw (top, left, crop_h, crop_w, flip) with the source aspect ratio kept."""
    scale = rng.uniform(*params.crop_scale_range)
    side = np.sqrt(scale)
    ch = max(1, min(height, int(round(height * side))))
    cw = max(1, min(width, int(round(width * side))))
    top = int(rng.integers(0, height - ch + 1))
    left = int(rng.integers(0, width - cw + 1))
    flip = bool(rng.random() < params.flip_prob)
    return top, left, ch, cw, flip


def augment(pair: PairedSample, params: AugmentationParams) -> PairedSample:
    """Random crop (same window for both images), optional h-flip, bilinear resize."""
    rng = np.random.default_rng(params.seed)
    h, w = pair.low.height, pair.low.width
    top, left, ch, cw, flip = sample_crop_window(rng, h, w, params)
    oh, ow = params.output_size
    if ch < oh or cw < ow:
        log.debug("pair %s: crop %dx%d smaller than output %dx%d, upscaling", pair.id, cw, ch, ow, oh)

    def apply(img: ImageTensor) -> ImageTensor:
        arr = img.data[top:top + ch, left:left + cw]
        if flip:
            arr = arr[:, ::-1]
        arr = resize_bilinear(np.ascontiguousarray(arr), (oh, ow))
        lo, hi = RANGES[img.range_tag]
        return ImageTensor(np.clip(arr, lo, hi), img.range_tag)

    return replace(pair, low=apply(pair.low), target=apply(pair.target))


def to_batch(img: ImageTensor) -> torch.Tensor:
    """ImageTensor -> 1×C×H×W float32 tensor (values unchanged)."""
    return torch.from_numpy(img.data.transpose(2, 0, 1).copy())[None]


def from_batch(t: torch.Tensor, range_tag: str) -> ImageTensor:
    arr = t.detach().cpu().float()[0].numpy().transpose(1, 2, 0)
    lo, hi = RANGES[range_tag]
    return ImageTensor(np.clip(arr, lo, hi), range_tag)
