"""Translator, discriminator and super-resolution networks."""

from cyclesr.nets.builders import (
    build_patch_discriminator,
    build_sr_network,
    build_sr_vdsr_mod,
    build_srresnet,
    build_translator_generator,
    count_parameters,
    receptive_field,
)
from cyclesr.nets.layers import BicubicUpsample, PixelShuffle, pixel_shuffle

__all__ = [
    "BicubicUpsample",
    "PixelShuffle",
    "build_patch_discriminator",
    "build_sr_network",
    "build_sr_vdsr_mod",
    "build_srresnet",
    "build_translator_generator",
    "count_parameters",
    "pixel_shuffle",
    "receptive_field",
]
