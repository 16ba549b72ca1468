"""Generator and critic objectives, gradient penalty and the VGG16 feature extractor."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn as nn
import torch.nn.functional as F

from .archive import read_archive, write_archive
from .errors import ContractError, ModelFileError, NumericError

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)
VGG_ENV = "EDNIG_VGG16_WEIGHTS"

# VGG16 ``features`` up to and including the ReLU after conv3_3 (indices 0..15).
_VGG_PLAN = [64, 64, "M", 128, 128, "M", 256, 256, 256]


@dataclass(frozen=True)
class LossWeights:
    lambda_adv: float = 100.0
    lambda_mse: float = 100.0
    lambda_per: float = 100.0
    lambda_cri: float = 1.0
    gp_weight: float = 10.0

    def __post_init__(self):
        bad = [k for k, v in asdict(self).items() if v < 0]
        if bad:
            raise ContractError(f"loss weights must be non-negative: {bad}")

    def scaled(self, factor: float) -> "LossWeights":
        return LossWeights(**{k: v * factor for k, v in asdict(self).items()})


def adversarial_loss(fake_scores: torch.Tensor) -> torch.Tensor:
    fake_scores = torch.as_tensor(fake_scores)
    if fake_scores.numel() == 0:
        raise ContractError("adversarial_loss needs a non-empty batch")
    return -fake_scores.mean()


def mse_loss(gen: torch.Tensor, gt: torch.Tensor) -> torch.Tensor:
    if gen.shape != gt.shape:
        raise ContractError(f"shape mismatch {tuple(gen.shape)} vs {tuple(gt.shape)}")
    return ((gen - gt) ** 2).mean()


def generator_loss(adv, mse, per, w: LossWeights = LossWeights()):
    return w.lambda_adv * adv + w.lambda_mse * mse + w.lambda_per * per


def critic_loss(real_scores, fake_scores, gp_term=0.0, w: LossWeights = LossWeights()):
    """Wasserstein critic objective: minimizing pushes real scores up, fake scores down."""
    real_scores, fake_scores = torch.as_tensor(real_scores), torch.as_tensor(fake_scores)
    if real_scores.shape != fake_scores.shape or real_scores.numel() == 0:
        raise ContractError(f"batch mismatch {tuple(real_scores.shape)} vs {tuple(fake_scores.shape)}")
    return w.lambda_cri * (fake_scores - real_scores).mean() + w.gp_weight * gp_term


def gradient_penalty(critic, real: torch.Tensor, fake: torch.Tensor,
                     generator: torch.Generator | None = None, eps: torch.Tensor | None = None) -> torch.Tensor:
    """Mean of (||grad C(x_hat)||_2 - 1)^2 on random real/fake interpolates."""
    if real.shape != fake.shape:
        raise ContractError(f"shape mismatch {tuple(real.shape)} vs {tuple(fake.shape)}")
    if eps is None:
        eps = torch.rand(real.shape[0], *([1] * (real.dim() - 1)), generator=generator, dtype=real.dtype)
    x_hat = (eps * real.detach() + (1 - eps) * fake.detach()).requires_grad_(True)
    scores = critic(x_hat)
    (grad,) = torch.autograd.grad(scores.sum(), x_hat, create_graph=True, allow_unused=True)
    if grad is None:
        grad = torch.zeros_like(x_hat)
    norm = torch.linalg.vector_norm(grad.flatten(1), dim=1)
    if not torch.isfinite(norm).all():
        raise NumericError("non-finite critic gradient in gradient penalty")
    return ((norm - 1.0) ** 2).mean()


class VGG16Features(nn.Module):
    """VGG16 convolutional trunk truncated after the conv3_3 activation.

    Parameter names match torchvision's ``vgg16().features`` state dict.
    """

    def __init__(self):
        super().__init__()
        layers: list[nn.Module] = []
        cin = 3
        for v in _VGG_PLAN:
            if v == "M":
                layers.append(nn.MaxPool2d(2, 2))
            else:
                layers += [nn.Conv2d(cin, v, 3, padding=1), nn.ReLU(inplace=False)]
                cin = v
        self.features = nn.Sequential(*layers)
        self.register_buffer("mean", torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(IMAGENET_STD).view(1, 3, 1, 1))
        self.requires_grad_(False)
        self.eval()

    def preprocess(self, x: torch.Tensor) -> torch.Tensor:
        return ((x + 1.0) * 0.5 - self.mean) / self.std

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Signed-range RGB in, conv3_3 activations out."""
        return self.features(self.preprocess(x))

    @classmethod
    def random(cls, seed: int = 0) -> "VGG16Features":
        """Fixed random-weight extractor, for tests and weight-free smoke runs."""
        m = cls()
        g = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            for conv in m.features:
                if isinstance(conv, nn.Conv2d):
                    conv.weight.normal_(0.0, (2.0 / conv.weight[0].numel()) ** 0.5, generator=g)
                    conv.bias.zero_()
        return m

    @classmethod
    def load(cls, path=None) -> "VGG16Features":
        path = path or os.environ.get(VGG_ENV)
        if not path or not Path(path).is_dir():
            raise ModelFileError(
                f"VGG16 weights archive not found at {path!r}. Convert torchvision's vgg16 "
                f"checkpoint once with `python scripts/import_vgg16.py vgg16-397923af.pth <out_dir>` "
                f"and pass that directory (or set {VGG_ENV}). Tests and smoke runs can use "
                f"VGG16Features.random(seed) instead."
            )
        tensors, _ = read_archive(path)
        m = cls()
        state = {k: torch.from_numpy(v) for k, v in tensors.items()}
        m.features.load_state_dict(state, strict=True)
        return m

    def save(self, path) -> None:
        write_archive(path, self.features.state_dict(), {"kind": "vgg16-conv3_3"})


def perceptual_loss(gen: torch.Tensor, gt: torch.Tensor, extractor: VGG16Features) -> torch.Tensor:
    """Feature-space MSE averaged over every element of the conv3_3 map."""
    if gen.shape != gt.shape:
        raise ContractError(f"shape mismatch {tuple(gen.shape)} vs {tuple(gt.shape)}")
    with torch.no_grad():
        target = extractor(gt)
    return F.mse_loss(extractor(gen), target)
