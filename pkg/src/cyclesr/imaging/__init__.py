"""Image representation, I/O, resampling and quality metrics."""

from cyclesr.imaging.image import (
    ImageTensor,
    bicubic_resample,
    check_image,
    load_image,
    normalize_to_reference,
    resample,
    save_image,
)
from cyclesr.imaging.metrics import PSNR_CAP, EvalResult, psnr, shift_tolerant_score, ssim

__all__ = [
    "PSNR_CAP",
    "EvalResult",
    "ImageTensor",
    "bicubic_resample",
    "check_image",
    "load_image",
    "normalize_to_reference",
    "psnr",
    "resample",
    "save_image",
    "shift_tolerant_score",
    "ssim",
]
