"""Loss-balance sweep over the MSE weight of the SR stage."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import torch

from cyclesr.core.config import Settings
from cyclesr.data.manifest import CorpusDataset
from cyclesr.training.inference import ValidationPair
from cyclesr.training.trainer import Trainer

logger = logging.getLogger(__name__)

ABLATION_CSV = "ablation.csv"
ABLATION_COLUMNS = ["lambda_mse", "psnr", "ssim", "run_dir"]


@dataclass(frozen=True)
class AblationRow:
    lambda_mse: float
    psnr: float
    ssim: float
    run_dir: Path


def run_name_for(lambda_mse: float) -> str:
    return f"lambda_mse_{lambda_mse:g}"


def ablation_settings(settings: Settings, lambda_mse: float) -> Settings:
    """Copy of ``settings`` training cyclesr with the given weight; samples kept at the last epoch by default."""
    train = settings.train
    weights = train.weights.model_copy(update={"lambda_mse": lambda_mse})
    sample_epochs = train.sample_epochs or [train.epochs_total]
    return settings.model_copy(
        update={
            "run_name": run_name_for(lambda_mse),
            "train": train.model_copy(update={"weights": weights, "mode": "cyclesr", "sample_epochs": sample_epochs}),
        }
    )


def ablate_lambda_mse(
    settings: Settings,
    corpus: CorpusDataset,
    validation: list[ValidationPair],
    values: list[float],
    out_dir: Path,
    device: torch.device | str = "cpu",
) -> list[AblationRow]:
    """Train one cyclesr model per value with a shared seed and score each on ``validation``."""
    if len(values) < 2:
        raise ValueError(f"ablation needs at least 2 values, got {values}")
    if len(set(values)) != len(values):
        raise ValueError(f"ablation values must be distinct: {values}")
    if not validation:
        raise ValueError("ablation needs validation pairs")
    out_dir = Path(out_dir)
    rows = []
    for value in values:
        run_settings = ablation_settings(settings, value)
        run_dir = out_dir / run_settings.run_name
        run_settings.dump_yaml(run_dir / "config.yaml")
        logger.info("Ablation run lambda_mse=%g -> %s", value, run_dir)
        trainer = Trainer(run_settings, run_dir, device)
        trainer.fit(corpus)
        psnr, ssim = trainer.evaluate(validation)
        rows.append(AblationRow(lambda_mse=value, psnr=psnr, ssim=ssim, run_dir=run_dir))
    write_ablation_csv(rows, out_dir / ABLATION_CSV)
    return rows


def write_ablation_csv(rows: list[AblationRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ABLATION_COLUMNS)
        for row in rows:
            writer.writerow([f"{row.lambda_mse:g}", f"{row.psnr:.6f}", f"{row.ssim:.6f}", str(row.run_dir)])
