"""Test fixtures for cyclesr."""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np
import pytest

from cyclesr.core.config import (
    DegradationSpec,
    DiscriminatorSpec,
    EvalProtocol,
    GaussianKernelSpec,
    ModelSpec,
    PerceptualSpec,
    PoissonNoiseSpec,
    Settings,
    ShiftSpec,
    SRSpec,
    TrainConfig,
    TranslatorSpec,
)
from cyclesr.data.manifest import load_manifest
from cyclesr.degrade.corpus import MANIFEST_NAME, synthesize_corpus
from cyclesr.degrade.procedural import generate_procedural_hr

PROJECT_ROOT = Path(__file__).resolve().parents[1]

# 64 px HR images; 48 px HR patches give 12 px LR patches, the smallest
# input the two-layer discriminator accepts.
TINY_HR_SIZE = 64
TINY_IMAGES = 6


def tiny_degradation() -> DegradationSpec:
    return DegradationSpec(
        scale=4,
        kernel=GaussianKernelSpec(sigma=1.0),
        noise=PoissonNoiseSpec(peak=256),
        shift=ShiftSpec(max=1),
    )


def tiny_model_spec(variant: str = "vdsr_mod") -> ModelSpec:
    return ModelSpec(
        translator=TranslatorSpec(n_res_blocks=1, base_width=8),
        discriminator=DiscriminatorSpec(n_layers=2, base_width=8),
        sr=SRSpec(variant=variant, depth=2, width=8, scale=4),
    )


def tiny_settings(runs_dir: Path, **train) -> Settings:
    """Settings small enough to train a few steps on CPU."""
    train_values = {
        "batch": 2,
        "hr_patch": 48,
        "scale": 4,
        "epochs_total": 2,
        "decay_start_epoch": 1,
        "pretrain_epochs": 1,
        "sample_count": 1,
        "device": "cpu",
        **train,
    }
    return Settings(
        run_name="tiny",
        runs_dir=str(runs_dir),
        degradation=tiny_degradation(),
        model=tiny_model_spec(),
        train=TrainConfig(**train_values),
        perceptual=PerceptualSpec(backend="random", random_width=4, random_depth=2),
        eval=EvalProtocol(max_shift=2, border=2),
    )


@pytest.fixture
def tmp_dir():
    with tempfile.TemporaryDirectory() as d:
        yield Path(d)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def hr_dir(tmp_dir):
    d = tmp_dir / "hr_src"
    generate_procedural_hr(d, TINY_IMAGES, TINY_HR_SIZE, seed=7)
    return d


@pytest.fixture
def corpus_dir(tmp_dir, hr_dir):
    out = tmp_dir / "corpus"
    synthesize_corpus(hr_dir, tiny_degradation(), out, seed=3)
    return out


@pytest.fixture
def corpus(corpus_dir):
    return load_manifest(corpus_dir / MANIFEST_NAME)


@pytest.fixture
def settings(tmp_dir):
    return tiny_settings(tmp_dir / "runs")
