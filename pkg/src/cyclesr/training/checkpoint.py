"""Checkpoints: ``weights.pt`` (state dicts, RNG state) plus a ``meta.json`` sidecar."""

from __future__ import annotations

import json
import logging
import pickle
import shutil
import tempfile
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

logger = logging.getLogger(__name__)

WEIGHTS_NAME = "weights.pt"
META_NAME = "meta.json"


@dataclass
class Checkpoint:
    path: Path
    epoch: int
    step: int
    mode: str
    meta: dict = field(default_factory=dict)
    state: dict | None = None

    @property
    def net_names(self) -> list[str]:
        return list(self.meta.get("parameter_names", {}))


def checkpoint_dir(run_dir: Path, epoch: int) -> Path:
    return Path(run_dir) / f"ckpt_{epoch}"


def save_checkpoint(
    run_dir: Path,
    epoch: int,
    step: int,
    mode: str,
    nets: dict[str, nn.Module],
    optimizers: dict[str, torch.optim.Optimizer],
    config: dict,
) -> Checkpoint:
    """Write ``run_dir/ckpt_<epoch>``; the directory appears only once complete."""
    target = checkpoint_dir(run_dir, epoch)
    meta = {
        "epoch": epoch,
        "training_step": step,
        "mode": mode,
        "model_spec": config.get("model"),
        "train": config.get("train"),
        "config": config,
        "parameter_names": {name: [n for n, _ in net.named_parameters()] for name, net in nets.items()},
        "shapes": {
            name: {n: list(p.shape) for n, p in net.named_parameters()} for name, net in nets.items()
        },
    }
    state = {
        "nets": {name: net.state_dict() for name, net in nets.items()},
        "optimizers": {name: opt.state_dict() for name, opt in optimizers.items()},
        "torch_rng": torch.get_rng_state(),
    }
    Path(run_dir).mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=run_dir))
    try:
        torch.save(state, staging / WEIGHTS_NAME)
        with open(staging / META_NAME, "w") as f:
            json.dump(meta, f, indent=2)
        if target.exists():
            shutil.rmtree(target)
        staging.rename(target)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    logger.info("Saved checkpoint %s (step %d)", target, step)
    return Checkpoint(path=target, epoch=epoch, step=step, mode=mode, meta=meta)


def load_checkpoint(path: Path, map_location: str | torch.device = "cpu") -> Checkpoint:
    path = Path(path)
    weights, meta_path = path / WEIGHTS_NAME, path / META_NAME
    if not weights.is_file() or not meta_path.is_file():
        raise FileNotFoundError(f"Checkpoint not found or incomplete: {path}")
    try:
        with open(meta_path) as f:
            meta = json.load(f)
        state = torch.load(weights, map_location=map_location, weights_only=True)
    except (ValueError, pickle.UnpicklingError, zipfile.BadZipFile, RuntimeError, EOFError, OSError) as e:
        raise ValueError(f"Corrupt checkpoint {path}: {e}") from e
    if not isinstance(state, dict) or "nets" not in state:
        raise ValueError(f"Corrupt checkpoint {path}: no network weights")
    missing = [k for k in ("epoch", "training_step", "mode") if k not in meta]
    if missing:
        raise ValueError(f"Corrupt checkpoint {path}: meta.json lacks {missing}")
    return Checkpoint(
        path=path,
        epoch=int(meta["epoch"]),
        step=int(meta["training_step"]),
        mode=meta["mode"],
        meta=meta,
        state=state,
    )
