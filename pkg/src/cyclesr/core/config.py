"""Configuration management using Pydantic Settings."""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------------------------------------------------------------------------
# Degradation
# ---------------------------------------------------------------------------

class DiracKernelSpec(_Section):
    kind: Literal["dirac"] = "dirac"


class GaussianKernelSpec(_Section):
    kind: Literal["gaussian"] = "gaussian"
    sigma: float = Field(1.0, ge=0.0)


class MotionKernelSpec(_Section):
    kind: Literal["motion"] = "motion"
    length: float = Field(5.0, ge=1.0)  # pixels
    angle: float = 0.0  # radians


class ExplicitKernelSpec(_Section):
    kind: Literal["explicit"] = "explicit"
    weights: list[list[float]]

    @field_validator("weights")
    @classmethod
    def _unit_mass(cls, v: list[list[float]]) -> list[list[float]]:
        if not v or not v[0] or any(len(row) != len(v[0]) for row in v):
            raise ValueError("explicit kernel must be a non-empty rectangular 2-D array")
        flat = [w for row in v for w in row]
        if min(flat) < 0:
            raise ValueError("explicit kernel entries must be non-negative")
        if abs(sum(flat) - 1.0) > 1e-6:
            raise ValueError(f"explicit kernel must sum to 1 (got {sum(flat):.8f})")
        return v


KernelSpec = Annotated[
    Union[DiracKernelSpec, GaussianKernelSpec, MotionKernelSpec, ExplicitKernelSpec],
    Field(discriminator="kind"),
]


class NoNoiseSpec(_Section):
    kind: Literal["none"] = "none"


class GaussianNoiseSpec(_Section):
    kind: Literal["gaussian"] = "gaussian"
    sigma: float = Field(0.01, ge=0.0)


class PoissonNoiseSpec(_Section):
    kind: Literal["poisson"] = "poisson"
    peak: float = Field(256.0, gt=0.0)  # expected photon count at value 1.0


NoiseSpec = Annotated[
    Union[NoNoiseSpec, GaussianNoiseSpec, PoissonNoiseSpec],
    Field(discriminator="kind"),
]


class ShiftSpec(_Section):
    """Fixed (dx, dy) translation, or a per-image random draw from [0, max]."""

    dx: int = 0
    dy: int = 0
    max: int | None = Field(None, ge=0)


class JitterSpec(_Section):
    """Per-image uniform ranges that override the base spec ("wild" setting)."""

    blur_sigma: tuple[float, float] | None = None
    motion_length: tuple[float, float] | None = None
    motion_angle: tuple[float, float] | None = None
    noise_sigma: tuple[float, float] | None = None
    noise_peak: tuple[float, float] | None = None

    @field_validator("*")
    @classmethod
    def _ordered(cls, v: tuple[float, float] | None) -> tuple[float, float] | None:
        if v is not None and v[0] > v[1]:
            raise ValueError(f"range lower bound exceeds upper bound: {v}")
        return v


class DegradationSpec(_Section):
    scale: int = Field(4, ge=1)
    kernel: KernelSpec = DiracKernelSpec()
    noise: NoiseSpec = NoNoiseSpec()
    shift: ShiftSpec = ShiftSpec()
    downsampler: Literal["bicubic", "bilinear", "nearest"] = "bicubic"
    jitter: JitterSpec | None = None


# ---------------------------------------------------------------------------
# Networks
# ---------------------------------------------------------------------------

class TranslatorSpec(_Section):
    n_res_blocks: int = Field(6, ge=1)
    base_width: int = Field(64, ge=1)


class DiscriminatorSpec(_Section):
    n_layers: int = Field(3, ge=1)
    base_width: int = Field(64, ge=1)


SR_DEFAULT_DEPTH = {"vdsr_mod": 20, "srresnet": 16}


class SRSpec(_Section):
    variant: Literal["vdsr_mod", "srresnet"] = "vdsr_mod"
    depth: int | None = Field(None, ge=1)
    width: int = Field(64, ge=1)
    scale: int = 4

    @field_validator("scale")
    @classmethod
    def _power_of_two(cls, v: int) -> int:
        if v < 2 or v & (v - 1):
            raise ValueError(f"SR scale must be a power of 2 (got {v})")
        return v

    @property
    def resolved_depth(self) -> int:
        return self.depth if self.depth is not None else SR_DEFAULT_DEPTH[self.variant]


class ModelSpec(_Section):
    translator: TranslatorSpec = TranslatorSpec()
    discriminator: DiscriminatorSpec = DiscriminatorSpec()
    sr: SRSpec = SRSpec()


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

class LossWeights(_Section):
    lambda_cyc: float = Field(10.0, ge=0.0)
    lambda_id: float = Field(0.5, ge=0.0)
    lambda_mse: float = Field(1e3, ge=0.0)
    lambda_percep: float = Field(1.0, ge=0.0)
    lambda_advsr: float = Field(0.05, ge=0.0)


class PerceptualSpec(_Section):
    backend: Literal["vgg19", "random", "identity"] = "vgg19"
    layers: list[str] = ["relu3_4"]
    random_depth: int = Field(3, ge=1)
    random_width: int = Field(16, ge=1)
    random_seed: int = 0


# ---------------------------------------------------------------------------
# Training and evaluation
# ---------------------------------------------------------------------------

TrainMode = Literal["cyclesr", "cyclesrgan", "cycle_plus_sr", "sr_syn", "sr_paired", "cyclegan"]
JOINT_MODES = ("cyclesr", "cyclesrgan", "cycle_plus_sr")
BASELINE_MODES = ("sr_syn", "sr_paired")
# CycleGAN between bicubic-upsampled real LR and HR, no separate SR network
UPSAMPLED_MODES = ("cyclegan",)


class TrainConfig(_Section):
    batch: int = Field(32, ge=1)
    hr_patch: int = Field(120, ge=1)
    scale: int = Field(4, ge=1)
    epochs_total: int = Field(200, ge=1)
    decay_start_epoch: int = 100
    pretrain_epochs: int = Field(5, ge=0)
    lr_cyclegan: float = Field(2e-4, gt=0.0)
    lr_sr: float = Field(1e-4, gt=0.0)
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    grad_clip_norm: float = Field(50.0, gt=0.0)
    weights: LossWeights = LossWeights()
    mode: TrainMode = "cyclesr"
    seed: int = Field(0, ge=0)
    patches_per_image: int = Field(1, ge=1)
    num_workers: int = Field(0, ge=0)
    device: str = "auto"
    sample_epochs: list[int] = []
    sample_count: int = Field(4, ge=0)
    validate_every: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _schedule(self) -> TrainConfig:
        if not 0 < self.decay_start_epoch < self.epochs_total:
            raise ValueError(
                f"decay_start_epoch must lie in (0, epochs_total): "
                f"{self.decay_start_epoch} vs {self.epochs_total}"
            )
        if self.pretrain_epochs > self.epochs_total:
            raise ValueError("pretrain_epochs exceeds epochs_total")
        if self.hr_patch % self.scale:
            raise ValueError(f"hr_patch {self.hr_patch} is not divisible by scale {self.scale}")
        return self

    @property
    def lr_patch(self) -> int:
        return self.hr_patch // self.scale


class EvalProtocol(_Section):
    max_shift: int = Field(40, ge=0)
    border: int = Field(4, ge=0)
    center_crop: int | None = Field(None, ge=1)


class Settings(BaseSettings):
    """RunConfig: the fully resolved configuration of one run."""

    model_config = SettingsConfigDict(
        env_prefix="CYCLESR_",
        env_nested_delimiter="__",
        extra="forbid",
    )

    run_name: str = "cyclesr"
    runs_dir: str = "runs"
    manifest: str | None = None
    val_manifest: str | None = None
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    degradation: DegradationSpec = DegradationSpec()
    model: ModelSpec = ModelSpec()
    train: TrainConfig = TrainConfig()
    perceptual: PerceptualSpec = PerceptualSpec()
    eval: EvalProtocol = EvalProtocol()

    @model_validator(mode="after")
    def _consistent_scale(self) -> Settings:
        scales = {self.train.scale, self.model.sr.scale, self.degradation.scale}
        if len(scales) != 1:
            raise ValueError(
                f"train.scale, model.sr.scale and degradation.scale disagree: {sorted(scales)}"
            )
        return self

    @classmethod
    def load(cls, config_path: Path | None = None, overrides: dict | None = None) -> Settings:
        """Load settings from YAML file, apply overrides, then overlay env vars."""
        data: dict = {}
        if config_path and config_path.exists():
            with open(config_path) as f:
                data = yaml.safe_load(f) or {}
        elif config_path:
            raise FileNotFoundError(f"Config file not found: {config_path}")
        for dotted, value in (overrides or {}).items():
            set_dotted(data, dotted, value)
        return cls(**data)

    def dump_yaml(self, path: Path) -> None:
        """Write the resolved configuration so the run can be reproduced."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.safe_dump(self.model_dump(mode="json"), f, sort_keys=False)


def set_dotted(data: dict, dotted: str, value) -> None:
    """Assign ``value`` at ``a.b.c`` inside a nested dict, creating sections."""
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ValueError(f"Cannot set '{dotted}': '{key}' is not a section")
    node[keys[-1]] = value


def get_project_root() -> Path:
    """Walk up from CWD to find pyproject.toml, or fall back to CWD."""
    current = Path.cwd()
    for parent in [current, *current.parents]:
        if (parent / "pyproject.toml").exists():
            return parent
    return current


def load_settings(config_path: Path | None = None, overrides: dict | None = None) -> Settings:
    """Load settings from ``config_path`` or the project root's config/settings.yaml."""
    if config_path is None:
        default = get_project_root() / "config" / "settings.yaml"
        config_path = default if default.exists() else None
    return Settings.load(config_path, overrides)
