"""Super-resolution networks."""

from __future__ import annotations

import math

import torch
from torch import nn

from cyclesr.core.config import SRSpec
from cyclesr.nets.layers import PixelShuffle


class PreActBlock(nn.Sequential):
    """BN -> ReLU -> 3x3 conv."""

    def __init__(self, width: int):
        super().__init__(
            nn.BatchNorm2d(width),
            nn.ReLU(inplace=True),
            nn.Conv2d(width, width, 3, padding=1, bias=False),
        )


class VDSRMod(nn.Module):
    """VDSR without the bicubic pre-upsampling, ending in a pixel shuffle.

    The global skip runs in feature space, from the stem to the block stack
    output, because the input is still at LR resolution.
    """

    def __init__(self, spec: SRSpec):
        super().__init__()
        self.scale = spec.scale
        self.stem = nn.Conv2d(3, spec.width, 3, padding=1)
        self.body = nn.Sequential(*[PreActBlock(spec.width) for _ in range(spec.resolved_depth)])
        self.head = nn.Sequential(
            nn.Conv2d(spec.width, 3 * spec.scale ** 2, 3, padding=1),
            PixelShuffle(spec.scale),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        feat = self.stem(x)
        return self.head(self.body(feat) + feat)


class SRResidualBlock(nn.Module):
    def __init__(self, width: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(width, width, 3, padding=1, bias=False),
            nn.BatchNorm2d(width),
            nn.PReLU(),
            nn.Conv2d(width, width, 3, padding=1, bias=False),
            nn.BatchNorm2d(width),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.block(x)


class SRResNet(nn.Module):
    """SRResNet generator with log2(scale) x2 pixel-shuffle stages."""

    def __init__(self, spec: SRSpec):
        super().__init__()
        w = spec.width
        self.scale = spec.scale
        n_stages = int(math.log2(spec.scale))
        if 2 ** n_stages != spec.scale:
            raise ValueError(f"srresnet supports power-of-2 scales only, got {spec.scale}")
        self.stem = nn.Sequential(nn.Conv2d(3, w, 9, padding=4), nn.PReLU())
        self.body = nn.Sequential(*[SRResidualBlock(w) for _ in range(spec.resolved_depth)])
        self.fuse = nn.Sequential(nn.Conv2d(w, w, 3, padding=1, bias=False), nn.BatchNorm2d(w))
        upsample: list[nn.Module] = []
        for _ in range(n_stages):
            upsample += [nn.Conv2d(w, w * 4, 3, padding=1), PixelShuffle(2), nn.PReLU()]
        self.upsample = nn.Sequential(*upsample)
        self.head = nn.Conv2d(w, 3, 9, padding=4)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        feat = self.stem(x)
        out = self.fuse(self.body(feat)) + feat
        return self.head(self.upsample(out))
