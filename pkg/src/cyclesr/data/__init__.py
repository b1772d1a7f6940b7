"""Manifest-driven datasets, patch sampling and batching."""

from cyclesr.data.loader import PatchDataset, batch_iterator, batches_per_epoch
from cyclesr.data.manifest import CorpusDataset, load_manifest
from cyclesr.data.patches import TrainBatch, TrainElement, augment, dihedral, sample_patch

__all__ = [
    "CorpusDataset",
    "PatchDataset",
    "TrainBatch",
    "TrainElement",
    "augment",
    "batch_iterator",
    "batches_per_epoch",
    "dihedral",
    "load_manifest",
    "sample_patch",
]
