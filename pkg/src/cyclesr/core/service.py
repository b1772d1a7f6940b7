"""Service layer wiring configuration, data, networks and the trainer."""

from __future__ import annotations

import logging
from pathlib import Path

import torch

from cyclesr.core.config import Settings, get_project_root, load_settings
from cyclesr.data.manifest import CorpusDataset, load_manifest
from cyclesr.training.ablation import AblationRow, ablate_lambda_mse
from cyclesr.training.checkpoint import Checkpoint, load_checkpoint
from cyclesr.training.inference import ValidationPair
from cyclesr.training.trainer import Trainer

logger = logging.getLogger(__name__)


class ExperimentService:
    """Central service shared by the CLI commands.

    Relative paths in the settings resolve against the project root.
    """

    def __init__(self, settings: Settings | None = None, root: Path | None = None):
        self._load_env()
        self.settings = settings or load_settings()
        self.root = root or get_project_root()
        self._device: torch.device | None = None
        self._corpus: CorpusDataset | None = None

    @staticmethod
    def _load_env():
        try:
            from dotenv import load_dotenv
            load_dotenv(get_project_root() / ".env")
        except ImportError:
            pass

    @property
    def device(self) -> torch.device:
        """Lazily resolve the configured device."""
        if self._device is None:
            name = self.settings.train.device
            if name == "auto":
                name = "cuda" if torch.cuda.is_available() else "cpu"
            elif name.startswith("cuda") and not torch.cuda.is_available():
                raise RuntimeError(f"Device '{name}' requested but CUDA is not available")
            self._device = torch.device(name)
            logger.info("Using device %s", self._device)
        return self._device

    @property
    def run_dir(self) -> Path:
        return self.root / self.settings.runs_dir / self.settings.run_name

    def _path(self, value: str) -> Path:
        return self.root / value

    @property
    def corpus(self) -> CorpusDataset:
        if self._corpus is None:
            if not self.settings.manifest:
                raise ValueError("No training manifest configured (set 'manifest' or pass --manifest)")
            self._corpus = load_manifest(self._path(self.settings.manifest))
        return self._corpus

    def validation_pairs(self) -> list[ValidationPair]:
        """Held-out manifest pairs if configured, else the training manifest's LR-domain pairs."""
        if self.settings.val_manifest:
            return load_manifest(self._path(self.settings.val_manifest)).validation_pairs(all_entries=True)
        return self.corpus.validation_pairs()

    def create_trainer(self, run_dir: Path | None = None) -> Trainer:
        return Trainer(self.settings, run_dir or self.run_dir, self.device)

    def train(self, resume: Path | None = None) -> Checkpoint:
        """Run the configured mode to ``epochs_total``, optionally from a checkpoint."""
        corpus = self.corpus
        validation = self.validation_pairs() if self.settings.train.validate_every else None
        self.settings.dump_yaml(self.run_dir / "config.yaml")
        trainer = self.create_trainer()
        if resume is not None:
            trainer.restore(load_checkpoint(resume, self.device))
        final = trainer.fit(corpus, validation)
        logger.info("Training finished: %s", final.path)
        return final

    def ablate(self, values: list[float], out_dir: Path | None = None) -> list[AblationRow]:
        out_dir = out_dir or self.run_dir
        self.settings.dump_yaml(out_dir / "config.yaml")
        return ablate_lambda_mse(
            self.settings, self.corpus, self.validation_pairs(), values, out_dir, self.device
        )
