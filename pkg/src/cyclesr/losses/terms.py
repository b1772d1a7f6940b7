"""Elementary loss terms."""

from __future__ import annotations

import torch
import torch.nn.functional as F


def _check_pair(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")


def lsgan_d_loss(scores_real: torch.Tensor, scores_fake: torch.Tensor) -> torch.Tensor:
    return 0.5 * torch.mean((scores_real - 1.0) ** 2) + 0.5 * torch.mean(scores_fake ** 2)


def lsgan_g_loss(scores_fake: torch.Tensor) -> torch.Tensor:
    return torch.mean((scores_fake - 1.0) ** 2)


def l1_mean(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _check_pair(a, b)
    return torch.mean(torch.abs(a - b))


def mse_mean(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _check_pair(a, b)
    return torch.mean((a - b) ** 2)


def ragan_losses(
    scores_real: torch.Tensor, scores_fake: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor]:
    """Relativistic average GAN losses as (g_loss, d_loss).

    -log(sigmoid(x)) = softplus(-x) and -log(1 - sigmoid(x)) = softplus(x).
    """
    rel_real = scores_real - scores_fake.mean()
    rel_fake = scores_fake - scores_real.mean()
    d_loss = F.softplus(-rel_real).mean() + F.softplus(rel_fake).mean()
    g_loss = F.softplus(-rel_fake).mean() + F.softplus(rel_real).mean()
    return g_loss, d_loss
