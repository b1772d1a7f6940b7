"""Stage objectives and the per-step loss report."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import torch
from torch import nn

from cyclesr.core.config import LossWeights
from cyclesr.losses.perceptual import FeatureExtractor, perceptual_loss
from cyclesr.losses.terms import l1_mean, lsgan_d_loss, lsgan_g_loss, mse_mean, ragan_losses

REPORT_KEYS = (
    "adv_g_s", "adv_g_r", "adv_d_s", "adv_d_r",
    "cyc_fwd", "cyc_bwd", "id_s", "id_r",
    "mse", "percep", "advsr_g", "advsr_d",
    "total_g", "total_d",
)


@dataclass
class TranslatorNets:
    g_s2r: nn.Module
    g_r2s: nn.Module
    d_s: nn.Module
    d_r: nn.Module


@dataclass
class StageLoss:
    """Differentiable objectives of one stage plus the individual terms."""

    g: torch.Tensor
    d: torch.Tensor | None
    terms: dict[str, torch.Tensor] = field(default_factory=dict)
    fake_real: torch.Tensor | None = None


@dataclass
class LossReport:
    adv_g_s: float | None = None
    adv_g_r: float | None = None
    adv_d_s: float | None = None
    adv_d_r: float | None = None
    cyc_fwd: float | None = None
    cyc_bwd: float | None = None
    id_s: float | None = None
    id_r: float | None = None
    mse: float | None = None
    percep: float | None = None
    advsr_g: float | None = None
    advsr_d: float | None = None
    total_g: float | None = None
    total_d: float | None = None

    @classmethod
    def from_stages(cls, *stages: StageLoss | None) -> LossReport:
        present = [s for s in stages if s is not None]
        values: dict[str, float] = {}
        for stage in present:
            values.update({k: float(v.detach()) for k, v in stage.terms.items()})
        values["total_g"] = float(sum(s.g.detach() for s in present))
        d_terms = [s.d.detach() for s in present if s.d is not None]
        if d_terms:
            values["total_d"] = float(sum(d_terms))
        return cls(**values)

    def scalars(self) -> dict[str, float]:
        """Recorded scalars only, in report order."""
        return {k: v for k, v in asdict(self).items() if v is not None}

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.scalars().values())


def stage1_loss(
    nets: TranslatorNets,
    batch_syn: torch.Tensor,
    batch_real: torch.Tensor,
    weights: LossWeights,
) -> StageLoss:
    """CycleGAN objective between the synthetic and real LR domains.

    ``d`` uses detached translations, so its backward only reaches the
    discriminators.
    """
    if batch_syn.shape[-2:] != batch_real.shape[-2:]:
        raise ValueError(
            f"LR batches differ in spatial size: {tuple(batch_syn.shape)} vs {tuple(batch_real.shape)}"
        )
    fake_real = nets.g_s2r(batch_syn)
    fake_syn = nets.g_r2s(batch_real)

    terms = {
        "adv_g_s": lsgan_g_loss(nets.d_s(fake_syn)),
        "adv_g_r": lsgan_g_loss(nets.d_r(fake_real)),
        "cyc_fwd": l1_mean(nets.g_r2s(fake_real), batch_syn),
        "cyc_bwd": l1_mean(nets.g_s2r(fake_syn), batch_real),
        "id_s": l1_mean(nets.g_r2s(batch_syn), batch_syn),
        "id_r": l1_mean(nets.g_s2r(batch_real), batch_real),
        "adv_d_s": lsgan_d_loss(nets.d_s(batch_syn), nets.d_s(fake_syn.detach())),
        "adv_d_r": lsgan_d_loss(nets.d_r(batch_real), nets.d_r(fake_real.detach())),
    }
    g = (
        terms["adv_g_s"] + terms["adv_g_r"]
        + weights.lambda_cyc * (terms["cyc_fwd"] + terms["cyc_bwd"])
        + weights.lambda_id * (terms["id_s"] + terms["id_r"])
    )
    return StageLoss(g=g, d=terms["adv_d_s"] + terms["adv_d_r"], terms=terms, fake_real=fake_real)


def stage2_loss(
    sr_out: torch.Tensor,
    hr: torch.Tensor,
    d_h: nn.Module | None,
    weights: LossWeights,
    extractor: FeatureExtractor | None,
) -> StageLoss:
    """SR objective; the adversarial term needs ``d_h`` and the perceptual term ``extractor``."""
    terms = {"mse": mse_mean(sr_out, hr)}
    g = weights.lambda_mse * terms["mse"]
    d = None
    if extractor is not None:
        terms["percep"] = perceptual_loss(sr_out, hr, extractor)
        g = g + weights.lambda_percep * terms["percep"]
    if d_h is not None:
        scores_real = d_h(hr)
        advsr_g, _ = ragan_losses(scores_real.detach(), d_h(sr_out))
        _, advsr_d = ragan_losses(scores_real, d_h(sr_out.detach()))
        terms["advsr_g"], terms["advsr_d"] = advsr_g, advsr_d
        g = g + weights.lambda_advsr * advsr_g
        d = advsr_d
    return StageLoss(g=g, d=d, terms=terms)
