"""Wasserstein critic: strided conv blocks, global average pool, linear score."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
import torch.nn as nn

from .errors import ContractError, NumericError
from .net import init_weights

ACTIVATIONS = {"swish": nn.SiLU, "leaky_relu": lambda: nn.LeakyReLU(0.2)}


@dataclass(frozen=True)
class CriticConfig:
    base_channels: int = 12
    num_blocks: int = 5
    kernel: int = 3
    stride: int = 2
    in_channels: int = 3
    activation: str = "swish"

    def __post_init__(self):
        if self.base_channels < 1 or self.num_blocks < 1:
            raise ContractError("base_channels and num_blocks must be positive")
        if self.kernel < 1 or self.kernel % 2 == 0 or self.stride < 1:
            raise ContractError("kernel must be odd and stride positive")
        if self.activation not in ACTIVATIONS:
            raise ContractError(f"activation must be one of {sorted(ACTIVATIONS)}")

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(self.base_channels * 2**b for b in range(self.num_blocks))

    @property
    def multiple(self) -> int:
        return self.stride**self.num_blocks

    def to_dict(self) -> dict:
        return asdict(self)


class Critic(nn.Module):
    def __init__(self, cfg: CriticConfig = CriticConfig()):
        super().__init__()
        self.cfg = cfg
        layers: list[nn.Module] = []
        cin = cfg.in_channels
        for w in cfg.widths:
            layers += [nn.Conv2d(cin, w, cfg.kernel, cfg.stride, cfg.kernel // 2), ACTIVATIONS[cfg.activation]()]
            cin = w
        self.features = nn.Sequential(*layers)
        self.fc = nn.Linear(cin, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """N×3×H×W -> N scores (no output activation)."""
        h = self.features(x).mean(dim=(2, 3))
        return self.fc(h).squeeze(1)


def build_critic(cfg: CriticConfig = CriticConfig(), init_seed: int = 0) -> Critic:
    return init_weights(Critic(cfg), init_seed)


@torch.no_grad()
def critic_score(critic: Critic, img: torch.Tensor) -> float:
    """Score one signed-range RGB image, checking every layer for non-finite values."""
    if img.dim() == 3:
        img = img[None]
    if img.shape[0] != 1 or img.shape[1] != critic.cfg.in_channels:
        raise ContractError(f"expected 1×{critic.cfg.in_channels}×H×W, got {tuple(img.shape)}")
    m = critic.cfg.multiple
    if img.shape[-2] % m or img.shape[-1] % m:
        raise ContractError(f"H×W {tuple(img.shape[-2:])} not divisible by {m}")
    h = img
    for name, layer in critic.features.named_children():
        h = layer(h)
        if not torch.isfinite(h).all():
            raise NumericError(f"non-finite activation after critic layer features.{name}")
    out = critic.fc(h.mean(dim=(2, 3)))
    if not torch.isfinite(out).all():
        raise NumericError("non-finite activation after critic layer fc")
    return float(out.item())
