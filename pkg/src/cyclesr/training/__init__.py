"""Training schedule, checkpoints, trainer, inference and ablation."""

from cyclesr.training.ablation import AblationRow, ablate_lambda_mse
from cyclesr.training.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from cyclesr.training.inference import bicubic_baseline, infer, load_sr_network
from cyclesr.training.schedule import clip_gradients, lr_at
from cyclesr.training.trainer import NonFiniteLossError, Trainer

__all__ = [
    "AblationRow",
    "Checkpoint",
    "NonFiniteLossError",
    "Trainer",
    "ablate_lambda_mse",
    "bicubic_baseline",
    "clip_gradients",
    "infer",
    "load_checkpoint",
    "load_sr_network",
    "lr_at",
    "save_checkpoint",
]
