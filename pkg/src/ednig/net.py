"""Illumination-guided U-Net generator with an SPP bottleneck."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ContractError


@dataclass(frozen=True)
class GeneratorConfig:
    base_channels: int = 12
    num_stages: int = 5
    convs_per_encoder_stage: int = 3
    convs_per_decoder_stage: int = 2
    spp_kernels: tuple[int, ...] = (5, 9, 13)
    input_channels: int = 4
    output_channels: int = 3

    def __post_init__(self):
        object.__setattr__(self, "spp_kernels", tuple(self.spp_kernels))
        if self.base_channels < 1 or self.num_stages < 1:
            raise ContractError("base_channels and num_stages must be positive")
        if self.convs_per_encoder_stage < 1 or self.convs_per_decoder_stage < 1:
            raise ContractError("each stage needs at least one convolution")
        k = self.spp_kernels
        if not k or any(x % 2 == 0 or x < 1 for x in k) or any(a >= b for a, b in zip(k, k[1:])):
            raise ContractError(f"spp_kernels must be odd and strictly increasing, got {k}")

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(self.base_channels * 2**s for s in range(self.num_stages))

    @property
    def multiple(self) -> int:
        return 2 ** (self.num_stages - 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spp_kernels"] = list(self.spp_kernels)
        return d


def conv3x3(cin: int, cout: int, stride: int = 1) -> nn.Conv2d:
    return nn.Conv2d(cin, cout, 3, stride=stride, padding=1, bias=True)


def conv_stack(cin: int, cout: int, n: int) -> nn.Sequential:
    layers: list[nn.Module] = []
    for i in range(n):
        layers += [conv3x3(cin if i == 0 else cout, cout), nn.SiLU()]
    return nn.Sequential(*layers)


class SPP(nn.Module):
    """Parallel stride-1 max-pools concatenated with the input, fused by 1×1 conv."""

    def __init__(self, channels: int, kernels=(5, 9, 13)):
        super().__init__()
        self.kernels = tuple(kernels)
        self.fuse = nn.Conv2d(channels * (len(self.kernels) + 1), channels, 1)
        self.act = nn.SiLU()

    def pooled(self, x: torch.Tensor) -> torch.Tensor:
        branches = [x] + [F.max_pool2d(x, k, stride=1, padding=k // 2) for k in self.kernels]
        return torch.cat(branches, dim=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.act(self.fuse(self.pooled(x)))


class UpLevel(nn.Module):
    def __init__(self, cin: int, cout: int, n_convs: int):
        super().__init__()
        self.up_conv = conv3x3(cin, cout)
        self.act = nn.SiLU()
        self.body = conv_stack(2 * cout, cout, n_convs)

    def forward(self, x: torch.Tensor, skip: torch.Tensor) -> torch.Tensor:
        x = F.interpolate(x, scale_factor=2, mode="nearest")
        x = self.act(self.up_conv(x))
        return self.body(torch.cat([x, skip], dim=1))


class Generator(nn.Module):
    def __init__(self, cfg: GeneratorConfig = GeneratorConfig()):
        super().__init__()
        self.cfg = cfg
        w = cfg.widths
        self.encoder = nn.ModuleList(
            conv_stack(cfg.input_channels if s == 0 else w[s - 1], w[s], cfg.convs_per_encoder_stage)
            for s in range(cfg.num_stages)
        )
        self.spp = SPP(w[-1], cfg.spp_kernels)
        self.decoder = nn.ModuleList(
            UpLevel(w[s], w[s - 1], cfg.convs_per_decoder_stage) for s in range(cfg.num_stages - 1, 0, -1)
        )
        self.head = nn.Conv2d(w[0], cfg.output_channels, 1)

    def forward(self, x: torch.Tensor, trace: list | None = None) -> torch.Tensor:
        """``x``: N×4×H×W signed-range. ``trace``, if given, collects encoder outputs."""
        if x.dim() != 4 or x.shape[1] != self.cfg.input_channels:
            raise ContractError(f"expected N×{self.cfg.input_channels}×H×W input, got {tuple(x.shape)}")
        m = self.cfg.multiple
        if x.shape[-2] % m or x.shape[-1] % m:
            raise ContractError(
                f"H×W {tuple(x.shape[-2:])} not divisible by {m}; use pad_to_multiple first"
            )
        skips = []
        for s, stage in enumerate(self.encoder):
            if s:
                x = F.max_pool2d(x, 2, 2)
            x = stage(x)
            skips.append(x)
            if trace is not None:
                trace.append(x)
        x = self.spp(x)
        for level, skip in zip(self.decoder, reversed(skips[:-1])):
            x = level(x, skip)
        return torch.tanh(self.head(x))


def init_weights(module: nn.Module, seed: int) -> nn.Module:
    """Fan-in scaled uniform init (He-uniform for hidden convs), zero biases."""
    g = torch.Generator().manual_seed(int(seed))
    with torch.no_grad():
        for m in module.modules():
            if isinstance(m, (nn.Conv2d, nn.Linear)):
                fan_in = m.weight[0].numel()
                bound = math.sqrt(6.0 / fan_in)
                m.weight.uniform_(-bound, bound, generator=g)
                if m.bias is not None:
                    m.bias.zero_()
    return module


def build_generator(cfg: GeneratorConfig = GeneratorConfig(), init_seed: int = 0) -> Generator:
    gen = init_weights(Generator(cfg), init_seed)
    with torch.no_grad():
        # Small head keeps initial outputs away from Tanh saturation.
        bound = 1.0 / math.sqrt(gen.head.weight[0].numel())
        g = torch.Generator().manual_seed(int(init_seed) + 1)
        gen.head.weight.uniform_(-bound, bound, generator=g)
    return gen


def count_parameters(weights) -> int:
    """Total element count of a module, a state dict or an iterable of tensors."""
    if isinstance(weights, nn.Module):
        tensors = list(weights.parameters())
    elif isinstance(weights, dict):
        tensors = list(weights.values())
    else:
        tensors = list(weights)
    return int(sum(int(np.prod(t.shape)) for t in tensors))


def pad_to_multiple(img: np.ndarray, m: int = 16):
    """Reflect-pad an H×W[×C] array on the bottom/right to multiples of ``m``.

    Returns ``(padded, crop_box)`` with ``crop_box = (top, left, height, width)``.
    """
    img = np.asarray(img)
    h, w = img.shape[:2]
    ph, pw = (-h) % m, (-w) % m
    box = (0, 0, h, w)
    if not ph and not pw:
        return img.copy(), box
    pad = [(0, ph), (0, pw)] + [(0, 0)] * (img.ndim - 2)
    mode = "reflect" if h > 1 and w > 1 else "edge"
    return np.pad(img, pad, mode=mode), box


def crop(img, box):
    top, left, h, w = box
    return img[top:top + h, left:left + w]
