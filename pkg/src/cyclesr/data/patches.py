"""Aligned patch sampling and dihedral augmentation."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import torch

from cyclesr.imaging.image import ImageTensor

DIHEDRAL_COUNT = 8


@dataclass
class TrainElement:
    hr: ImageTensor
    lr_syn: ImageTensor
    lr_real: ImageTensor
    lr_paired: ImageTensor | None = None
    hr_id: str = ""
    lr_real_id: str = ""


@dataclass
class TrainBatch:
    hr: torch.Tensor  # [B, 3, P, P]
    lr_syn: torch.Tensor  # [B, 3, P/s, P/s], aligned with hr
    lr_real: torch.Tensor  # [B, 3, P/s, P/s], unpaired
    hr_ids: list[str]
    lr_real_ids: list[str]
    lr_paired: torch.Tensor | None = None  # real LR of the same crops as hr

    def __len__(self) -> int:
        return self.hr.shape[0]

    def to(self, device: torch.device | str) -> TrainBatch:
        return replace(
            self,
            hr=self.hr.to(device),
            lr_syn=self.lr_syn.to(device),
            lr_real=self.lr_real.to(device),
            lr_paired=None if self.lr_paired is None else self.lr_paired.to(device),
        )


def _crop(img: ImageTensor, y: int, x: int, size: int) -> ImageTensor:
    return img[:, y:y + size, x:x + size].copy()


def _check_fits(img: ImageTensor, size: int, name: str) -> None:
    if img.shape[1] < size or img.shape[2] < size:
        raise ValueError(f"{name} image {img.shape[1]}x{img.shape[2]} is smaller than patch {size}")


def sample_patch(
    hr_img: ImageTensor,
    lr_syn_img: ImageTensor,
    lr_real_img: ImageTensor,
    patch: int,
    scale: int,
    rng: np.random.Generator,
    lr_paired_img: ImageTensor | None = None,
    paired_shift: tuple[int, int] = (0, 0),
) -> TrainElement:
    """Aligned (hr, lr_syn) crop plus an independent lr_real crop.

    The hr corner is drawn on the LR grid so hr (y, x) maps to lr_syn (y/s, x/s).
    ``lr_paired_img``, when given, is translated by ``paired_shift`` = (dx, dy)
    against lr_syn and is cropped at (y + dy, x + dx); the corner is then
    restricted so that crop stays inside the image.
    """
    if patch % scale:
        raise ValueError(f"patch {patch} is not divisible by scale {scale}")
    lr_patch = patch // scale
    _check_fits(hr_img, patch, "hr")
    _check_fits(lr_syn_img, lr_patch, "lr_syn")
    _check_fits(lr_real_img, lr_patch, "lr_real")

    lo_y, lo_x = 0, 0
    max_y = min(hr_img.shape[1] // scale, lr_syn_img.shape[1]) - lr_patch
    max_x = min(hr_img.shape[2] // scale, lr_syn_img.shape[2]) - lr_patch
    dx, dy = paired_shift
    if lr_paired_img is not None:
        if lr_paired_img.shape[1:] != lr_syn_img.shape[1:]:
            raise ValueError(
                f"lr_paired {lr_paired_img.shape[1:]} and lr_syn {lr_syn_img.shape[1:]} differ in size"
            )
        lo_y, lo_x = max(0, -dy), max(0, -dx)
        max_y = min(max_y, lr_paired_img.shape[1] - lr_patch - dy)
        max_x = min(max_x, lr_paired_img.shape[2] - lr_patch - dx)
        if max_y < lo_y or max_x < lo_x:
            raise ValueError(f"shift ({dx}, {dy}) leaves no room for a {lr_patch} px paired crop")
    ly, lx = int(rng.integers(lo_y, max_y + 1)), int(rng.integers(lo_x, max_x + 1))
    ry = int(rng.integers(0, lr_real_img.shape[1] - lr_patch + 1))
    rx = int(rng.integers(0, lr_real_img.shape[2] - lr_patch + 1))

    paired = None
    if lr_paired_img is not None:
        paired = _crop(lr_paired_img, ly + dy, lx + dx, lr_patch)
    return TrainElement(
        hr=_crop(hr_img, ly * scale, lx * scale, patch),
        lr_syn=_crop(lr_syn_img, ly, lx, lr_patch),
        lr_real=_crop(lr_real_img, ry, rx, lr_patch),
        lr_paired=paired,
    )


def dihedral(img: ImageTensor, k: int) -> ImageTensor:
    """Transform ``k`` of the 8-element dihedral group: k % 4 quarter turns, then a flip if k >= 4."""
    if not 0 <= k < DIHEDRAL_COUNT:
        raise ValueError(f"dihedral index must lie in [0, 8), got {k}")
    if k % 2 and img.shape[1] != img.shape[2]:
        raise ValueError(f"cannot rotate a non-square {img.shape[1]}x{img.shape[2]} patch by 90 degrees")
    out = np.rot90(img, k % 4, axes=(1, 2))
    if k >= 4:
        out = out[:, :, ::-1]
    return np.ascontiguousarray(out)


def augment(element: TrainElement, rng: np.random.Generator) -> TrainElement:
    """Same random transform on hr/lr_syn/lr_paired, an independent one on lr_real."""
    k_pair = int(rng.integers(0, DIHEDRAL_COUNT))
    k_real = int(rng.integers(0, DIHEDRAL_COUNT))
    return replace(
        element,
        hr=dihedral(element.hr, k_pair),
        lr_syn=dihedral(element.lr_syn, k_pair),
        lr_paired=None if element.lr_paired is None else dihedral(element.lr_paired, k_pair),
        lr_real=dihedral(element.lr_real, k_real),
    )
