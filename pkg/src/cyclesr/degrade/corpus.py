"""Unpaired corpus synthesis and its JSON manifest."""

from __future__ import annotations

import json
import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from tqdm import tqdm

from cyclesr.core.config import DegradationSpec
from cyclesr.degrade.pipeline import degrade_with_shift, downsample
from cyclesr.imaging.image import list_images, load_image, save_image

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

Role = Literal["hr_domain", "lr_domain"]


class ManifestEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    role: Role
    hr: str | None = None
    lr_real: str | None = None
    lr_syn: str | None = None
    shift: tuple[int, int] | None = None  # (dx, dy) applied to lr_real


class CorpusManifest(BaseModel):
    """Paths are relative to the directory holding the manifest file."""

    model_config = ConfigDict(extra="forbid")

    seed: int
    degradation: DegradationSpec
    synthetic_downsampler: Literal["bicubic", "bilinear", "nearest"] = "bicubic"
    entries: list[ManifestEntry]

    @model_validator(mode="after")
    def _consistent(self) -> CorpusManifest:
        seen: dict[str, Role] = {}
        for entry in self.entries:
            if entry.id in seen:
                if seen[entry.id] != entry.role:
                    raise ValueError(f"image id '{entry.id}' appears in both the HR and LR splits")
                raise ValueError(f"duplicate image id in manifest: {entry.id}")
            seen[entry.id] = entry.role
            if entry.lr_syn is not None and entry.hr is None:
                raise ValueError(f"lr_syn entry '{entry.id}' has no paired hr image")
        return self

    @property
    def hr_entries(self) -> list[tuple[str, str]]:
        return [(e.id, e.hr) for e in self.entries if e.hr is not None]

    @property
    def lr_real_entries(self) -> list[tuple[str, str]]:
        return [(e.id, e.lr_real) for e in self.entries if e.lr_real is not None]

    @property
    def lr_syn_entries(self) -> list[tuple[str, str]]:
        return [(e.id, e.lr_syn) for e in self.entries if e.lr_syn is not None]

    @property
    def split(self) -> dict[str, Role]:
        return {e.id: e.role for e in self.entries}

    def ids_with_role(self, role: Role) -> list[str]:
        return [e.id for e in self.entries if e.role == role]

    def write(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.model_dump(mode="json"), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def read(cls, path: Path) -> CorpusManifest:
        if not path.is_file():
            raise FileNotFoundError(f"Manifest not found: {path}")
        with open(path) as f:
            return cls.model_validate(json.load(f))


def image_rng(seed: int, image_id: str) -> np.random.Generator:
    """Generator derived from (seed, image_id), independent of processing order."""
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(image_id.encode())]))


def split_ids(ids: list[str]) -> dict[str, Role]:
    """First ceil(n/2) sorted ids -> HR domain, the rest -> LR domain."""
    ordered = sorted(ids)
    n_hr = math.ceil(len(ordered) / 2)
    return {i: ("hr_domain" if k < n_hr else "lr_domain") for k, i in enumerate(ordered)}


def _load_all(paths: list[Path], scale: int) -> dict[str, np.ndarray]:
    images, offenders = {}, []
    for path in paths:
        try:
            img = load_image(path)
        except ValueError as e:
            offenders.append(f"{path.name} ({e})")
            continue
        _, h, w = img.shape
        if h % scale or w % scale:
            offenders.append(f"{path.name} ({h}x{w} not divisible by {scale})")
            continue
        images[path.stem] = img
    if offenders:
        raise ValueError("Unusable HR images: " + "; ".join(offenders))
    return images


def synthesize_corpus(
    hr_dir: Path,
    spec: DegradationSpec,
    out_dir: Path,
    seed: int,
    synthetic_downsampler: str = "bicubic",
    workers: int = 1,
) -> CorpusManifest:
    """Write hr/, lr_syn/ and lr_real/ PNGs plus manifest.json under ``out_dir``.

    Every HR image gets a clean synthetic LR and a degraded "real" LR. The
    manifest splits the sorted ids in two halves: the first half is the HR
    domain, the second the real-LR domain.
    """
    hr_dir, out_dir = Path(hr_dir), Path(out_dir)
    paths = list_images(hr_dir)
    if len(paths) < 2:
        raise ValueError(f"Need at least 2 HR images in {hr_dir}, found {len(paths)}")
    stems = [p.stem for p in paths]
    if len(set(stems)) != len(stems):
        raise ValueError(f"Duplicate image stems in {hr_dir}")
    images = _load_all(paths, spec.scale)
    roles = split_ids(list(images))

    def process(image_id: str) -> ManifestEntry:
        hr = images[image_id]
        lr_syn = downsample(hr, spec.scale, synthetic_downsampler)
        lr_real, shift = degrade_with_shift(hr, spec, image_rng(seed, image_id))
        rel = {sub: f"{sub}/{image_id}.png" for sub in ("hr", "lr_syn", "lr_real")}
        save_image(hr, out_dir / rel["hr"])
        save_image(lr_syn, out_dir / rel["lr_syn"])
        save_image(lr_real, out_dir / rel["lr_real"])
        return ManifestEntry(id=image_id, role=roles[image_id], shift=shift, **rel)

    ids = sorted(images)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        entries = list(tqdm(pool.map(process, ids), total=len(ids), desc="synth", unit="img", leave=False, disable=None))

    manifest = CorpusManifest(
        seed=seed,
        degradation=spec,
        synthetic_downsampler=synthetic_downsampler,
        entries=entries,
    )
    manifest.write(out_dir / MANIFEST_NAME)
    logger.info(
        "Synthesized %d images into %s (%d HR-domain, %d LR-domain)",
        len(entries), out_dir,
        len(manifest.ids_with_role("hr_domain")), len(manifest.ids_with_role("lr_domain")),
    )
    return manifest
