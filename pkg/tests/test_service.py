"""Tests for ExperimentService wiring."""

import pytest
import torch

from cyclesr.core.service import ExperimentService
from cyclesr.degrade.corpus import MANIFEST_NAME
from cyclesr.training.checkpoint import load_checkpoint
from tests.conftest import tiny_settings


def _service(tmp_dir, **update):
    settings = tiny_settings("runs").model_copy(update=update)
    return ExperimentService(settings, root=tmp_dir)


class TestExperimentService:
    def test_run_dir_under_root(self, tmp_dir):
        svc = _service(tmp_dir)
        assert svc.run_dir == tmp_dir / "runs" / "tiny"

    def test_missing_manifest(self, tmp_dir):
        with pytest.raises(ValueError, match="No training manifest"):
            _service(tmp_dir).corpus

    def test_cuda_unavailable(self, tmp_dir, monkeypatch):
        monkeypatch.setattr(torch.cuda, "is_available", lambda: False)
        svc = _service(tmp_dir)
        svc.settings = svc.settings.model_copy(
            update={"train": svc.settings.train.model_copy(update={"device": "cuda"})}
        )
        with pytest.raises(RuntimeError, match="CUDA is not available"):
            svc.device

    def test_auto_device_falls_back_to_cpu(self, tmp_dir, monkeypatch):
        monkeypatch.setattr(torch.cuda, "is_available", lambda: False)
        svc = _service(tmp_dir)
        svc.settings = svc.settings.model_copy(
            update={"train": svc.settings.train.model_copy(update={"device": "auto"})}
        )
        assert svc.device == torch.device("cpu")

    def test_validation_pairs_fallback(self, tmp_dir, corpus_dir, corpus):
        manifest = str((corpus_dir / MANIFEST_NAME).relative_to(tmp_dir))
        svc = _service(tmp_dir, manifest=manifest)
        assert [i for i, _, _ in svc.validation_pairs()] == corpus.validation_ids()

    def test_held_out_manifest_uses_every_entry(self, tmp_dir, corpus_dir, corpus):
        manifest = str((corpus_dir / MANIFEST_NAME).relative_to(tmp_dir))
        svc = _service(tmp_dir, manifest=manifest, val_manifest=manifest)
        assert len(svc.validation_pairs()) == len(corpus.manifest.entries)

    def test_train_and_resume(self, tmp_dir, corpus_dir):
        manifest = str((corpus_dir / MANIFEST_NAME).relative_to(tmp_dir))
        svc = _service(tmp_dir, manifest=manifest)
        final = svc.train()
        assert final.path == svc.run_dir / "ckpt_2"
        assert (svc.run_dir / "config.yaml").is_file()

        resumed = _service(tmp_dir, manifest=manifest).train(resume=svc.run_dir / "ckpt_1")
        assert load_checkpoint(resumed.path).step == 2
