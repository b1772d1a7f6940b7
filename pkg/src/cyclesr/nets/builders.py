"""Network constructors keyed by ModelSpec."""

from __future__ import annotations

import torch
from torch import nn

from cyclesr.core.config import ModelSpec
from cyclesr.nets.layers import init_normal
from cyclesr.nets.sr import SRResNet, VDSRMod
from cyclesr.nets.translator import PatchDiscriminator, TranslatorGenerator


def _seeded(seed: int | None, factory):
    if seed is None:
        return factory()
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return factory()


def _cyclegan_init(module: nn.Module) -> nn.Module:
    module.apply(init_normal)
    return module


def build_translator_generator(spec: ModelSpec, seed: int | None = None) -> TranslatorGenerator:
    return _seeded(seed, lambda: _cyclegan_init(TranslatorGenerator(spec.translator)))


def build_patch_discriminator(spec: ModelSpec, seed: int | None = None) -> PatchDiscriminator:
    return _seeded(seed, lambda: _cyclegan_init(PatchDiscriminator(spec.discriminator)))


def build_sr_vdsr_mod(spec: ModelSpec, seed: int | None = None) -> VDSRMod:
    if spec.sr.variant != "vdsr_mod":
        raise ValueError(f"expected sr.variant 'vdsr_mod', got '{spec.sr.variant}'")
    return _seeded(seed, lambda: VDSRMod(spec.sr))


def build_srresnet(spec: ModelSpec, seed: int | None = None) -> SRResNet:
    if spec.sr.variant != "srresnet":
        raise ValueError(f"expected sr.variant 'srresnet', got '{spec.sr.variant}'")
    return _seeded(seed, lambda: SRResNet(spec.sr))


def build_sr_network(spec: ModelSpec, seed: int | None = None) -> nn.Module:
    """Dispatch on ``spec.sr.variant``."""
    if spec.sr.variant == "vdsr_mod":
        return build_sr_vdsr_mod(spec, seed)
    return build_srresnet(spec, seed)


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def receptive_field(discriminator: PatchDiscriminator) -> int:
    """Input side seen by one output score, via r <- (r - 1) * stride + kernel."""
    rf = 1
    for conv in reversed(discriminator.conv_layers()):
        rf = (rf - 1) * conv.stride[0] + conv.kernel_size[0]
    return rf
