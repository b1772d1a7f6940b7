"""Degradation model: y = shift((x * k) downsampled by s) + n."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from cyclesr.core.config import (
    DegradationSpec,
    GaussianKernelSpec,
    GaussianNoiseSpec,
    MotionKernelSpec,
    NoiseSpec,
    NoNoiseSpec,
    PoissonNoiseSpec,
)
from cyclesr.degrade.kernels import make_kernel, validate_kernel
from cyclesr.imaging.image import ImageTensor, resample


def apply_blur(img: ImageTensor, kernel: np.ndarray) -> ImageTensor:
    """Per-channel 2-D correlation with reflect padding; output shape = input shape."""
    validate_kernel(kernel)
    _, h, w = img.shape
    if max(kernel.shape) > 2 * min(h, w):
        raise ValueError(f"kernel {kernel.shape} is too large for a {h}x{w} image")
    if kernel.shape == (1, 1):
        return img * kernel[0, 0]
    # scipy's "mirror" is whole-sample reflection, the same fill used by apply_shift
    return np.stack([ndimage.correlate(channel, kernel, mode="mirror") for channel in img])


def apply_noise(img: ImageTensor, noise: NoiseSpec, rng: np.random.Generator) -> ImageTensor:
    """Add noise; the result is not clamped."""
    if isinstance(noise, NoNoiseSpec):
        return img.copy()
    if isinstance(noise, GaussianNoiseSpec):
        if noise.sigma == 0:
            return img.copy()
        return img + rng.normal(0.0, noise.sigma, size=img.shape)
    if isinstance(noise, PoissonNoiseSpec):
        return rng.poisson(np.clip(img, 0.0, 1.0) * noise.peak) / noise.peak
    raise ValueError(f"Unknown noise spec: {noise!r}")


def apply_shift(img: ImageTensor, dx: int, dy: int) -> ImageTensor:
    """Integer translation: out[c, i, j] = in[c, i - dy, j - dx], vacated pixels reflected."""
    _, h, w = img.shape
    if abs(dx) >= w or abs(dy) >= h:
        raise ValueError(f"shift ({dx}, {dy}) exceeds image size {h}x{w}")
    if dx == 0 and dy == 0:
        return img.copy()
    top, left = max(dy, 0), max(dx, 0)
    padded = np.pad(img, ((0, 0), (top, max(-dy, 0)), (left, max(-dx, 0))), mode="reflect")
    return padded[:, top - dy:top - dy + h, left - dx:left - dx + w].copy()


def _uniform(rng: np.random.Generator, bounds: tuple[float, float] | None) -> float | None:
    return None if bounds is None else float(rng.uniform(bounds[0], bounds[1]))


def realize_spec(spec: DegradationSpec, rng: np.random.Generator) -> DegradationSpec:
    """Draw the per-image parameters of a jittered spec; plain specs pass through."""
    jitter = spec.jitter
    if jitter is None:
        return spec
    kernel, noise = spec.kernel, spec.noise
    if isinstance(kernel, GaussianKernelSpec) and jitter.blur_sigma:
        kernel = kernel.model_copy(update={"sigma": _uniform(rng, jitter.blur_sigma)})
    if isinstance(kernel, MotionKernelSpec):
        updates = {}
        if jitter.motion_length:
            updates["length"] = _uniform(rng, jitter.motion_length)
        if jitter.motion_angle:
            updates["angle"] = _uniform(rng, jitter.motion_angle)
        kernel = kernel.model_copy(update=updates)
    if isinstance(noise, GaussianNoiseSpec) and jitter.noise_sigma:
        noise = noise.model_copy(update={"sigma": _uniform(rng, jitter.noise_sigma)})
    if isinstance(noise, PoissonNoiseSpec) and jitter.noise_peak:
        noise = noise.model_copy(update={"peak": _uniform(rng, jitter.noise_peak)})
    return spec.model_copy(update={"kernel": kernel, "noise": noise, "jitter": None})


def draw_shift(spec: DegradationSpec, rng: np.random.Generator) -> tuple[int, int]:
    if spec.shift.max is None:
        return spec.shift.dx, spec.shift.dy
    dx, dy = rng.integers(0, spec.shift.max + 1, size=2)
    return int(dx), int(dy)


def downsample(img: ImageTensor, scale: int, method: str = "bicubic") -> ImageTensor:
    """Reduce by an integer factor; both sides must be divisible by ``scale``."""
    _, h, w = img.shape
    if h % scale or w % scale:
        raise ValueError(f"image size {h}x{w} is not divisible by scale {scale}")
    return resample(img, 1 / scale if scale > 1 else 1, method)


def degrade_with_shift(
    img: ImageTensor, spec: DegradationSpec, rng: np.random.Generator
) -> tuple[ImageTensor, tuple[int, int]]:
    """Like ``degrade`` but also returns the drawn (dx, dy) translation."""
    _, h, w = img.shape
    if h % spec.scale or w % spec.scale:
        raise ValueError(f"HR size {h}x{w} is not divisible by scale {spec.scale}")
    spec = realize_spec(spec, rng)
    out = apply_blur(img, make_kernel(spec.kernel))
    out = downsample(out, spec.scale, spec.downsampler)
    dx, dy = draw_shift(spec, rng)
    out = apply_shift(out, dx, dy)
    return apply_noise(out, spec.noise, rng), (dx, dy)


def degrade(img: ImageTensor, spec: DegradationSpec, rng: np.random.Generator) -> ImageTensor:
    """Blur, downsample, shift, then add noise. Deterministic given (spec, rng state)."""
    return degrade_with_shift(img, spec, rng)[0]
