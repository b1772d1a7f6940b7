"""Feature extractors for the perceptual loss."""

from __future__ import annotations

import logging

import torch
from torch import nn

from cyclesr.core.config import PerceptualSpec
from cyclesr.losses.terms import mse_mean

logger = logging.getLogger(__name__)

_VGG19_LAYERS = {
    "relu1_1": 1, "relu1_2": 3,
    "relu2_1": 6, "relu2_2": 8,
    "relu3_1": 11, "relu3_2": 13, "relu3_3": 15, "relu3_4": 17,
    "relu4_1": 20, "relu4_2": 22, "relu4_3": 24, "relu4_4": 26,
    "relu5_1": 29, "relu5_2": 31, "relu5_3": 33, "relu5_4": 35,
}
_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)


class FeatureExtractor(nn.Module):
    """Frozen network mapping an image batch to named feature maps."""

    layers: list[str]

    def freeze(self) -> FeatureExtractor:
        for p in self.parameters():
            p.requires_grad_(False)
        return self.eval()

    def train(self, mode: bool = True) -> FeatureExtractor:
        # always in eval mode
        return super().train(False)


class IdentityExtractor(FeatureExtractor):
    def __init__(self):
        super().__init__()
        self.layers = ["identity"]

    def forward(self, x: torch.Tensor) -> dict[str, torch.Tensor]:
        return {"identity": x}


class RandomConvExtractor(FeatureExtractor):
    """Fixed-seed stack of 3x3 conv + ReLU stages; every stage is a feature layer."""

    def __init__(self, depth: int = 3, width: int = 16, seed: int = 0):
        super().__init__()
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            stages, in_ch = [], 3
            for _ in range(depth):
                stages.append(nn.Sequential(nn.Conv2d(in_ch, width, 3, padding=1), nn.ReLU()))
                in_ch = width
        self.stages = nn.ModuleList(stages)
        self.layers = [f"relu{i + 1}" for i in range(depth)]
        self.freeze()

    def forward(self, x: torch.Tensor) -> dict[str, torch.Tensor]:
        features = {}
        for name, stage in zip(self.layers, self.stages):
            x = stage(x)
            features[name] = x
        return features


class VGGExtractor(FeatureExtractor):
    """ImageNet VGG19 features, inputs in [0, 1] normalized with ImageNet statistics."""

    def __init__(self, layers: list[str]):
        super().__init__()
        unknown = [name for name in layers if name not in _VGG19_LAYERS]
        if unknown:
            raise ValueError(f"Unknown VGG19 layers: {unknown}; choose from {sorted(_VGG19_LAYERS)}")
        from torchvision.models import VGG19_Weights, vgg19

        last = max(_VGG19_LAYERS[name] for name in layers)
        vgg = vgg19(weights=VGG19_Weights.IMAGENET1K_V1)
        self.features = nn.Sequential(*list(vgg.features.children())[: last + 1])
        self.layers = list(layers)
        self._taps = {_VGG19_LAYERS[name]: name for name in layers}
        self.register_buffer("mean", torch.tensor(_IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(_IMAGENET_STD).view(1, 3, 1, 1))
        self.freeze()

    def forward(self, x: torch.Tensor) -> dict[str, torch.Tensor]:
        x = (x - self.mean) / self.std
        features = {}
        for idx, layer in enumerate(self.features):
            x = layer(x)
            if idx in self._taps:
                features[self._taps[idx]] = x
        return features


def build_extractor(spec: PerceptualSpec) -> FeatureExtractor:
    """Construct the configured backend; VGG falls back to random when unavailable."""
    if spec.backend == "identity":
        return IdentityExtractor()
    if spec.backend == "vgg19":
        try:
            return VGGExtractor(spec.layers)
        except ValueError:
            raise
        except Exception as e:
            logger.warning("VGG19 weights unavailable (%s); using random conv features", e)
    return RandomConvExtractor(spec.random_depth, spec.random_width, spec.random_seed)


def perceptual_loss(
    sr: torch.Tensor, hr: torch.Tensor, extractor: FeatureExtractor | None
) -> torch.Tensor:
    """Sum over the extractor's layers of the feature-space MSE."""
    if extractor is None:
        raise ValueError("perceptual_loss requires a feature extractor")
    if sr.shape != hr.shape:
        raise ValueError(f"shape mismatch: {tuple(sr.shape)} vs {tuple(hr.shape)}")
    sr_feats, hr_feats = extractor(sr), extractor(hr)
    return sum(mse_mean(sr_feats[name], hr_feats[name]) for name in extractor.layers)
