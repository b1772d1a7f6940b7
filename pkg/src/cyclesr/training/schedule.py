"""Learning-rate schedule and gradient clipping."""

from __future__ import annotations

from collections.abc import Iterable

import torch
from torch.nn.utils import clip_grad_norm_


def lr_at(epoch: int, base: float, decay_start: int, total: int) -> float:
    """Constant ``base`` until ``decay_start``, then linear decay reaching 0 at ``total``."""
    if not 0 <= epoch <= total:
        raise ValueError(f"epoch {epoch} outside [0, {total}]")
    if not 0 < decay_start < total:
        raise ValueError(f"decay_start {decay_start} must lie in (0, {total})")
    if epoch < decay_start:
        return base
    return base * (total - epoch) / (total - decay_start)


def clip_gradients(params: Iterable[torch.nn.Parameter], max_norm: float) -> float:
    """Rescale gradients to global L2 norm <= ``max_norm``; returns the factor applied."""
    if max_norm <= 0:
        raise ValueError(f"max_norm must be positive, got {max_norm}")
    params = [p for p in params if p.grad is not None]
    if not params:
        return 1.0
    total = float(clip_grad_norm_(params, max_norm))
    # clip_grad_norm_ uses max_norm / (total + 1e-6), capped at 1
    return min(1.0, max_norm / (total + 1e-6))


def set_epoch_lr(optimizer: torch.optim.Optimizer, epoch: int, decay_start: int, total: int) -> None:
    """Apply ``lr_at`` to every group, each from its own ``base_lr``."""
    for group in optimizer.param_groups:
        group["lr"] = lr_at(epoch, group["base_lr"], decay_start, total)


def group_lrs(optimizer: torch.optim.Optimizer) -> dict[str, float]:
    return {group["name"]: group["lr"] for group in optimizer.param_groups}
