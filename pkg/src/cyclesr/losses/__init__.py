"""Loss terms and stage objectives."""

from cyclesr.losses.composite import LossReport, StageLoss, TranslatorNets, stage1_loss, stage2_loss
from cyclesr.losses.perceptual import build_extractor, perceptual_loss
from cyclesr.losses.terms import l1_mean, lsgan_d_loss, lsgan_g_loss, mse_mean, ragan_losses

__all__ = [
    "LossReport",
    "StageLoss",
    "TranslatorNets",
    "build_extractor",
    "l1_mean",
    "lsgan_d_loss",
    "lsgan_g_loss",
    "mse_mean",
    "perceptual_loss",
    "ragan_losses",
    "stage1_loss",
    "stage2_loss",
]
