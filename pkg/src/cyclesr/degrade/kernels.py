"""Blur kernels for the degradation model."""

from __future__ import annotations

import math

import numpy as np

from cyclesr.core.config import (
    DiracKernelSpec,
    ExplicitKernelSpec,
    GaussianKernelSpec,
    KernelSpec,
    MotionKernelSpec,
)


def dirac_kernel() -> np.ndarray:
    return np.ones((1, 1))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Isotropic Gaussian truncated at +-3 sigma, odd side, unit sum."""
    if sigma < 0:
        raise ValueError(f"gaussian sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return dirac_kernel()
    radius = max(1, math.ceil(3.0 * sigma))
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    k = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return k / k.sum()


def motion_kernel(length: float, angle: float) -> np.ndarray:
    """Rasterized unit-mass line segment centered on the kernel origin.

    The segment is sampled densely and each sample is splatted bilinearly,
    so fractional lengths and arbitrary angles are supported.
    """
    if length < 1:
        raise ValueError(f"motion length must be >= 1 pixel, got {length}")
    half = length / 2.0
    radius = math.ceil(half) + 1
    side = 2 * radius + 1
    k = np.zeros((side, side))
    n = max(2, int(math.ceil(length * 8)) + 1)
    t = np.linspace(-half, half, n)
    xs = radius + t * math.cos(angle)
    ys = radius - t * math.sin(angle)
    x0, y0 = np.floor(xs).astype(int), np.floor(ys).astype(int)
    fx, fy = xs - x0, ys - y0
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            np.add.at(k, (y0 + dy, x0 + dx), wy * wx)
    k = _trim(k)
    return k / k.sum()


def _trim(k: np.ndarray) -> np.ndarray:
    """Drop all-zero outer rings while keeping the side odd and centered."""
    while k.shape[0] > 1 and not k[0].any() and not k[-1].any() and not k[:, 0].any() and not k[:, -1].any():
        k = k[1:-1, 1:-1]
    return k


def make_kernel(spec: KernelSpec) -> np.ndarray:
    """Build the normalized, non-negative 2-D kernel described by ``spec``."""
    if isinstance(spec, DiracKernelSpec):
        return dirac_kernel()
    if isinstance(spec, GaussianKernelSpec):
        return gaussian_kernel(spec.sigma)
    if isinstance(spec, MotionKernelSpec):
        return motion_kernel(spec.length, spec.angle)
    if isinstance(spec, ExplicitKernelSpec):
        return validate_kernel(np.asarray(spec.weights, dtype=np.float64))
    raise ValueError(f"Unknown kernel spec: {spec!r}")


def validate_kernel(kernel: np.ndarray) -> np.ndarray:
    if kernel.ndim != 2 or kernel.size == 0:
        raise ValueError(f"kernel must be a non-empty 2-D array, got shape {kernel.shape}")
    if (kernel < 0).any():
        raise ValueError("kernel entries must be non-negative")
    if abs(kernel.sum() - 1.0) > 1e-6:
        raise ValueError(f"kernel must sum to 1, got {kernel.sum():.8f}")
    return kernel
