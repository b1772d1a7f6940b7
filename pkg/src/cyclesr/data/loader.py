"""Epoch-shuffled, deterministic TrainBatch streams."""

from __future__ import annotations

from collections.abc import Iterator

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from cyclesr.core.config import TrainConfig
from cyclesr.data.manifest import CorpusDataset
from cyclesr.data.patches import TrainBatch, TrainElement, augment, sample_patch


def element_rng(seed: int, epoch: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, epoch, index]))


class PatchDataset(Dataset):
    """One epoch of patch sources: each HR-domain image appears ``patches_per_image`` times.

    Position ``i`` of the epoch uses its own generator from (seed, epoch, i),
    so elements are reproducible regardless of worker scheduling.
    """

    def __init__(
        self,
        corpus: CorpusDataset,
        config: TrainConfig,
        seed: int,
        paired_real: bool = False,
    ):
        if not corpus.hr_ids:
            raise ValueError("Manifest has no HR-domain entries")
        if not corpus.lr_ids and not paired_real:
            raise ValueError("Manifest has no LR-domain entries")
        if paired_real and not corpus.has_paired_real:
            raise ValueError("Paired training needs a real LR image for every HR-domain entry")
        self.corpus = corpus
        self.config = config
        self.seed = seed
        self.paired_real = paired_real
        self.sources = [i for i in corpus.hr_ids for _ in range(config.patches_per_image)]
        self.order = list(range(len(self.sources)))
        self.epoch = 0

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch
        self.order = np.random.default_rng([self.seed, epoch]).permutation(len(self.sources)).tolist()

    def __len__(self) -> int:
        return len(self.sources)

    def __getitem__(self, index: int) -> TrainElement:
        rng = element_rng(self.seed, self.epoch, index)
        hr_id = self.sources[self.order[index]]
        lr_pool = self.corpus.lr_ids or self.corpus.hr_ids
        lr_real_id = lr_pool[int(rng.integers(0, len(lr_pool)))]
        element = sample_patch(
            self.corpus.hr(hr_id),
            self.corpus.lr_syn(hr_id),
            self.corpus.lr_real(lr_real_id),
            self.config.hr_patch,
            self.config.scale,
            rng,
            lr_paired_img=self.corpus.lr_real(hr_id) if self.paired_real else None,
            paired_shift=self.corpus.shift(hr_id) if self.paired_real else (0, 0),
        )
        element = augment(element, rng)
        element.hr_id, element.lr_real_id = hr_id, lr_real_id
        return element


def _stack(arrays: list[np.ndarray]) -> torch.Tensor:
    return torch.from_numpy(np.stack(arrays)).float()


def collate(elements: list[TrainElement]) -> TrainBatch:
    paired = [e.lr_paired for e in elements]
    return TrainBatch(
        hr=_stack([e.hr for e in elements]),
        lr_syn=_stack([e.lr_syn for e in elements]),
        lr_real=_stack([e.lr_real for e in elements]),
        hr_ids=[e.hr_id for e in elements],
        lr_real_ids=[e.lr_real_id for e in elements],
        lr_paired=None if any(p is None for p in paired) else _stack(paired),
    )


def batches_per_epoch(dataset: PatchDataset, batch: int) -> int:
    return len(dataset) // batch


def batch_iterator(
    dataset: PatchDataset,
    config: TrainConfig,
    seed: int,
    epoch: int = 0,
) -> Iterator[TrainBatch]:
    """Full batches for one epoch; the last partial batch is dropped."""
    if len(dataset) < config.batch:
        raise ValueError(
            f"HR split provides {len(dataset)} patch sources, fewer than one batch of {config.batch}"
        )
    dataset.seed = seed
    dataset.set_epoch(epoch)
    loader = DataLoader(
        dataset,
        batch_size=config.batch,
        shuffle=False,
        drop_last=True,
        num_workers=config.num_workers,
        collate_fn=collate,
    )
    yield from loader
