"""LR<->LR translation networks: ResNet generator and PatchGAN discriminator."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from cyclesr.core.config import DiscriminatorSpec, TranslatorSpec


class ResidualBlock(nn.Module):
    def __init__(self, features: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(features, features, 3, bias=False),
            nn.InstanceNorm2d(features),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(features, features, 3, bias=False),
            nn.InstanceNorm2d(features),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.block(x)


class TranslatorGenerator(nn.Module):
    """Resolution-preserving generator; inputs and outputs live in [0, 1].

    Inputs whose sides are not multiples of 4 are padded on the bottom and
    right before the two stride-2 stages and the output is cropped back.
    """

    def __init__(self, spec: TranslatorSpec):
        super().__init__()
        w = spec.base_width
        layers: list[nn.Module] = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(3, w, 7, bias=False),
            nn.InstanceNorm2d(w),
            nn.ReLU(inplace=True),
        ]
        for mult in (1, 2):
            layers += [
                nn.Conv2d(w * mult, w * mult * 2, 3, stride=2, padding=1, bias=False),
                nn.InstanceNorm2d(w * mult * 2),
                nn.ReLU(inplace=True),
            ]
        layers += [ResidualBlock(w * 4) for _ in range(spec.n_res_blocks)]
        for mult in (4, 2):
            layers += [
                nn.ConvTranspose2d(w * mult, w * mult // 2, 3, stride=2, padding=1, output_padding=1, bias=False),
                nn.InstanceNorm2d(w * mult // 2),
                nn.ReLU(inplace=True),
            ]
        layers += [nn.ReflectionPad2d(3), nn.Conv2d(w, 3, 7), nn.Tanh()]
        self.model = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h, w = x.shape[-2:]
        ph, pw = -h % 4, -w % 4
        if ph or pw:
            # reflect needs the pad to be smaller than the side
            mode = "reflect" if ph < h and pw < w else "replicate"
            x = F.pad(x, (0, pw, 0, ph), mode=mode)
        out = (self.model(x * 2.0 - 1.0) + 1.0) / 2.0
        return out[..., :h, :w]


class PatchDiscriminator(nn.Module):
    """PatchGAN classifier emitting raw (unbounded) per-patch scores."""

    def __init__(self, spec: DiscriminatorSpec):
        super().__init__()
        w = spec.base_width
        layers: list[nn.Module] = [
            nn.Conv2d(3, w, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        ]
        mult = 1
        for n in range(1, spec.n_layers):
            prev, mult = mult, min(2 ** n, 8)
            layers += [
                nn.Conv2d(w * prev, w * mult, 4, stride=2, padding=1, bias=False),
                nn.InstanceNorm2d(w * mult),
                nn.LeakyReLU(0.2, inplace=True),
            ]
        prev, mult = mult, min(2 ** spec.n_layers, 8)
        layers += [
            nn.Conv2d(w * prev, w * mult, 4, stride=1, padding=1, bias=False),
            nn.InstanceNorm2d(w * mult),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(w * mult, 1, 4, stride=1, padding=1),
        ]
        self.model = nn.Sequential(*layers)

    def conv_layers(self) -> list[nn.Conv2d]:
        return [m for m in self.model if isinstance(m, nn.Conv2d)]

    def output_size(self, size: int) -> int:
        """Side of the score map for an input side ``size``; <= 0 means too small."""
        for conv in self.conv_layers():
            k, s, p = conv.kernel_size[0], conv.stride[0], conv.padding[0]
            size = (size + 2 * p - k) // s + 1
            if size < 1:
                return size
        return size

    def min_input_size(self) -> int:
        size = 1
        while self.output_size(size) < 1:
            size += 1
        return size

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h, w = x.shape[-2:]
        if self.output_size(min(h, w)) < 1:
            raise ValueError(
                f"discriminator input {h}x{w} is too small; need at least "
                f"{self.min_input_size()} px per side"
            )
        return self.model(x)
