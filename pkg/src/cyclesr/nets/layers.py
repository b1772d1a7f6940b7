"""Shared building blocks."""

from __future__ import annotations

import torch
from torch import nn

from cyclesr.imaging.image import resample_weights


def pixel_shuffle(x: torch.Tensor, r: int) -> torch.Tensor:
    """Sub-pixel rearrangement: out[b, c, r*i + p, r*j + q] = x[b, c*r*r + p*r + q, i, j]."""
    if r < 1:
        raise ValueError(f"upscale factor must be >= 1, got {r}")
    b, c, h, w = x.shape
    if c % (r * r):
        raise ValueError(f"channel count {c} is not divisible by r^2 = {r * r}")
    if r == 1:
        return x
    out_c = c // (r * r)
    x = x.reshape(b, out_c, r, r, h, w)
    return x.permute(0, 1, 4, 2, 5, 3).reshape(b, out_c, h * r, w * r)


class PixelShuffle(nn.Module):
    def __init__(self, r: int):
        super().__init__()
        self.r = r

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return pixel_shuffle(x, self.r)

    def extra_repr(self) -> str:
        return f"r={self.r}"


def init_normal(module: nn.Module, std: float = 0.02) -> None:
    """N(0, std) conv weights and zero biases; norm-layer scales N(1, std)."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
        nn.init.normal_(module.weight, 0.0, std)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, (nn.BatchNorm2d, nn.InstanceNorm2d)) and module.weight is not None:
        nn.init.normal_(module.weight, 1.0, std)
        nn.init.zeros_(module.bias)


class BicubicUpsample(nn.Module):
    """Integer-factor Keys bicubic upsampling, identical to ``bicubic_resample`` on each image."""

    def __init__(self, scale: int):
        super().__init__()
        if scale < 1:
            raise ValueError(f"upscale factor must be >= 1, got {scale}")
        self.scale = scale

    def _weights(self, n: int, like: torch.Tensor) -> torch.Tensor:
        w = resample_weights(n, n * self.scale, float(self.scale), "bicubic")
        return torch.as_tensor(w, dtype=like.dtype, device=like.device)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.scale == 1:
            return x
        h, w = x.shape[-2:]
        return self._weights(h, x) @ x @ self._weights(w, x).T

    def extra_repr(self) -> str:
        return f"scale={self.scale}"
