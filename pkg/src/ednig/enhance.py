"""Single-image inference at native resolution."""
from __future__ import annotations

import numpy as np
import torch

from .illum import IlluminationParams, four_channel_input
from .imgio import ImageTensor, denormalize
from .net import Generator, crop, pad_to_multiple


def prepare_input(low: ImageTensor, illum: IlluminationParams = IlluminationParams()) -> torch.Tensor:
    """Byte/unit-range RGB -> 1×4×H×W signed-range network input (RGB + illumination)."""
    x = four_channel_input(low, illum)
    return torch.from_numpy(x.transpose(2, 0, 1).copy())[None]


@torch.no_grad()
def enhance_image(gen: Generator, low: ImageTensor, illum: IlluminationParams = IlluminationParams()) -> ImageTensor:
    """Enhance one image of any size; returns a byte-range RGB ImageTensor of the same size."""
    x = four_channel_input(low, illum)
    padded, box = pad_to_multiple(x, gen.cfg.multiple)
    inp = torch.from_numpy(padded.transpose(2, 0, 1).copy())[None]
    was_training = gen.training
    gen.eval()
    out = gen(inp)[0].numpy().transpose(1, 2, 0)
    gen.train(was_training)
    out = np.clip(crop(out, box), -1.0, 1.0)
    return denormalize(ImageTensor(out, "signed"))
