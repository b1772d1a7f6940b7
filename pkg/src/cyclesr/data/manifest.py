"""Validated, image-caching view over a corpus manifest."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from cyclesr.degrade.corpus import CorpusManifest, ManifestEntry
from cyclesr.imaging.image import ImageTensor, load_image

logger = logging.getLogger(__name__)


class CorpusDataset:
    """The two domain splits of a corpus.

    HR-domain ids provide (hr, lr_syn) pairs; LR-domain ids provide unpaired
    real LR images. Images are decoded on first use and cached.
    """

    def __init__(self, root: Path, manifest: CorpusManifest):
        self.root = Path(root)
        self.manifest = manifest
        self._entries = {e.id: e for e in manifest.entries}
        split = manifest.split
        self.hr_ids = [i for i, role in split.items() if role == "hr_domain"]
        self.lr_ids = [i for i, role in split.items() if role == "lr_domain"]
        self._cache: dict[tuple[str, str], ImageTensor] = {}

    @property
    def scale(self) -> int:
        return self.manifest.degradation.scale

    def entry(self, image_id: str) -> ManifestEntry:
        try:
            return self._entries[image_id]
        except KeyError:
            raise ValueError(f"Unknown image id: {image_id}") from None

    def _image(self, image_id: str, kind: str) -> ImageTensor:
        key = (image_id, kind)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        rel = getattr(self.entry(image_id), kind)
        if rel is None:
            raise ValueError(f"Image '{image_id}' has no {kind} file in the manifest")
        img = load_image(self.root / rel)
        self._cache[key] = img
        return img

    def hr(self, image_id: str) -> ImageTensor:
        return self._image(image_id, "hr")

    def lr_syn(self, image_id: str) -> ImageTensor:
        return self._image(image_id, "lr_syn")

    def lr_real(self, image_id: str) -> ImageTensor:
        return self._image(image_id, "lr_real")

    def shift(self, image_id: str) -> tuple[int, int]:
        """(dx, dy) by which lr_real is translated against lr_syn; (0, 0) when unrecorded."""
        return self.entry(image_id).shift or (0, 0)

    @property
    def has_paired_real(self) -> bool:
        """Whether every HR-domain image also has its own real LR."""
        return bool(self.hr_ids) and all(self._entries[i].lr_real is not None for i in self.hr_ids)

    def validation_ids(self, all_entries: bool = False) -> list[str]:
        """Ids with both ``hr`` and ``lr_real``; LR-domain only unless ``all_entries``."""
        pool = self.manifest.entries if all_entries else [self._entries[i] for i in self.lr_ids]
        return [e.id for e in pool if e.hr is not None and e.lr_real is not None]

    def validation_pairs(self, all_entries: bool = False) -> list[tuple[str, ImageTensor, ImageTensor]]:
        return [(i, self.lr_real(i), self.hr(i)) for i in self.validation_ids(all_entries)]

    def mean_abs_lr_gap(self) -> float:
        """Mean per-pixel |lr_real - lr_syn| over entries that have both."""
        gaps = [
            float(np.mean(np.abs(self.lr_real(e.id) - self.lr_syn(e.id))))
            for e in self.manifest.entries
            if e.lr_real is not None and e.lr_syn is not None
        ]
        if not gaps:
            raise ValueError("Manifest has no entries with both lr_real and lr_syn")
        return float(np.mean(gaps))


def load_manifest(path: str | Path) -> CorpusDataset:
    """Read and validate a manifest; every referenced file must exist."""
    path = Path(path)
    manifest = CorpusManifest.read(path)
    root = path.parent
    missing = [
        rel
        for entry in manifest.entries
        for rel in (entry.hr, entry.lr_syn, entry.lr_real)
        if rel is not None and not (root / rel).is_file()
    ]
    if missing:
        raise ValueError(f"Manifest {path} references missing files: {missing}")
    for entry in manifest.entries:
        if entry.role == "hr_domain" and (entry.hr is None or entry.lr_syn is None):
            raise ValueError(f"HR-domain entry '{entry.id}' needs both hr and lr_syn")
        if entry.role == "lr_domain" and entry.lr_real is None:
            raise ValueError(f"LR-domain entry '{entry.id}' needs lr_real")
    dataset = CorpusDataset(root, manifest)
    logger.info(
        "Loaded manifest %s: %d HR-domain, %d LR-domain entries",
        path, len(dataset.hr_ids), len(dataset.lr_ids),
    )
    return dataset
