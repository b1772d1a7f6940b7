"""One-stage inference and validation scoring."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

import numpy as np
import torch
from torch import nn

from cyclesr.core.config import EvalProtocol, ModelSpec
from cyclesr.imaging.image import ImageTensor, bicubic_resample, check_image, from_tensor, to_tensor
from cyclesr.imaging.metrics import EvalResult, shift_tolerant_score
from cyclesr.nets.builders import build_sr_network, build_translator_generator
from cyclesr.nets.layers import BicubicUpsample
from cyclesr.training.checkpoint import Checkpoint

logger = logging.getLogger(__name__)

SR_NET = "g_l2h"
UPSAMPLED_NET = "g_u2h"

ValidationPair = tuple[str, ImageTensor, ImageTensor]  # (image_id, lr, hr)


def sr_model(nets: dict[str, nn.Module], scale: int) -> nn.Module:
    """The LR -> HR map of a run: G_l2h, or bicubic upsampling followed by G_u2h."""
    if SR_NET in nets:
        return nets[SR_NET]
    if UPSAMPLED_NET in nets:
        return nn.Sequential(BicubicUpsample(scale), nets[UPSAMPLED_NET])
    raise ValueError(f"No SR network among {sorted(nets)}")


def load_sr_network(checkpoint: Checkpoint, device: torch.device | str = "cpu") -> nn.Module:
    """Rebuild the one-stage SR model from the checkpoint's model spec and weights."""
    saved = {} if checkpoint.state is None else checkpoint.state.get("nets", {})
    name = next((n for n in (SR_NET, UPSAMPLED_NET) if n in saved), None)
    if name is None:
        raise ValueError(f"Checkpoint {checkpoint.path} has no SR network weights")
    spec = ModelSpec.model_validate(checkpoint.meta["model_spec"])
    net = build_sr_network(spec) if name == SR_NET else build_translator_generator(spec)
    net.load_state_dict(saved[name])
    return sr_model({name: net}, spec.sr.scale).to(device).eval()


def infer(
    lr_img: ImageTensor,
    model: Checkpoint | nn.Module,
    device: torch.device | str = "cpu",
) -> ImageTensor:
    """Single eval-mode pass of the SR model; output clamped to [0, 1]."""
    check_image(lr_img, "lr_img")
    net = load_sr_network(model, device) if isinstance(model, Checkpoint) else model
    was_training = net.training
    net.eval()
    try:
        with torch.no_grad():
            out = net(to_tensor(lr_img).to(device)).clamp(0.0, 1.0)
    finally:
        net.train(was_training)
    return from_tensor(out)


def score_predictions(
    pairs: Sequence[ValidationPair],
    predict: Callable[[ImageTensor], ImageTensor],
    protocol: EvalProtocol,
) -> list[tuple[str, EvalResult]]:
    return [
        (image_id, shift_tolerant_score(predict(lr), hr, protocol.max_shift, protocol.border, protocol.center_crop))
        for image_id, lr, hr in pairs
    ]


def mean_scores(results: list[tuple[str, EvalResult]]) -> tuple[float, float]:
    if not results:
        raise ValueError("No validation pairs to score")
    return (
        float(np.mean([r.psnr for _, r in results])),
        float(np.mean([r.ssim for _, r in results])),
    )


def bicubic_baseline(
    pairs: Sequence[ValidationPair], scale: int, protocol: EvalProtocol
) -> tuple[float, float]:
    """Mean shift-tolerant PSNR/SSIM of plain bicubic upsampling."""
    results = score_predictions(pairs, lambda lr: np.clip(bicubic_resample(lr, scale), 0.0, 1.0), protocol)
    return mean_scores(results)
