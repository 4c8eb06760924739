"""Anti-alias pre-filter bank for downscaling (average, disk, gaussian, motion).

All kernels are centered (odd height and width), non-negative and normalised
to unit sum, so a constant image passes through unchanged.  Convolution uses
replicate (edge-clamp) padding: zero padding would darken borders and corrupt
border-region quality metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .resize import RasterImage, ResizeSpec, quantize_clamp, resize_image
from .vp_basis import MatrixCache

KERNEL_KINDS = ("average", "disk", "gaussian", "motion")

# conventional defaults of the usual 2-D filter factories
DEFAULT_AVERAGE_SIZE = 3
DEFAULT_DISK_RADIUS = 5.0
DEFAULT_GAUSSIAN_SIZE = 3
DEFAULT_GAUSSIAN_SIGMA = 0.5
DEFAULT_MOTION_LENGTH = 9
DEFAULT_MOTION_ANGLE = 0.0

_DISK_SUBSAMPLES = 64  # per axis, for pillbox area weights


@dataclass(frozen=True)
class FilterKernel:
    """Normalised convolution kernel with its construction parameters."""

    taps: np.ndarray
    kind: str
    params: dict

    @property
    def shape(self) -> tuple[int, int]:
        return self.taps.shape


def _average_taps(size: int) -> np.ndarray:
    if size < 1 or size % 2 == 0:
        raise ValueError(f"average size must be odd and >= 1, got {size}")
    return np.full((size, size), 1.0 / (size * size))


def _gaussian_taps(size: int, sigma: float) -> np.ndarray:
    if size < 1 or size % 2 == 0:
        raise ValueError(f"gaussian size must be odd and >= 1, got {size}")
    if sigma <= 0:
        raise ValueError(f"gaussian sigma must be > 0, got {sigma}")
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    x, y = np.meshgrid(offsets, offsets)
    taps = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def _disk_taps(radius: float) -> np.ndarray:
    if radius < 0.5:
        raise ValueError(f"disk radius must be >= 0.5, got {radius}")
    half = int(math.ceil(radius - 0.5))
    side = 2 * half + 1
    # area weight per cell = fraction of the cell covered by the disk,
    # estimated on a regular subgrid
    ss = _DISK_SUBSAMPLES
    sub = (np.arange(ss) + 0.5) / ss - 0.5
    centers = np.arange(side, dtype=np.float64) - half
    xs = centers[:, None] + sub[None, :]  # (side, ss)
    d2 = xs[:, None, :, None] ** 2 + xs[None, :, None, :] ** 2
    taps = np.mean(d2 <= radius * radius, axis=(2, 3))
    return taps / taps.sum()


def _motion_taps(length: int, angle: float) -> np.ndarray:
    if length < 1:
        raise ValueError(f"motion length must be >= 1, got {length}")
    phi = math.radians(angle % 180.0)
    dx, dy = math.cos(phi), math.sin(phi)
    if abs(dx) < 1e-12:
        dx = 0.0
    if abs(dy) < 1e-12:
        dy = 0.0
    half = (length - 1) / 2.0
    half_cols = int(math.ceil(half * abs(dx)))
    half_rows = int(math.ceil(half * abs(dy)))
    rows = 2 * half_rows + 1
    cols = 2 * half_cols + 1
    # anti-aliased segment: weight falls off linearly with distance from the
    # centered line segment of the requested length
    c = np.arange(cols, dtype=np.float64) - half_cols
    r = half_rows - np.arange(rows, dtype=np.float64)  # y grows upward
    x, y = np.meshgrid(c, r)
    proj = np.clip(x * dx + y * dy, -half, half)
    dist = np.hypot(x - proj * dx, y - proj * dy)
    taps = np.maximum(0.0, 1.0 - dist)
    return taps / taps.sum()


def make_kernel(kind: str, **params) -> FilterKernel:
    """Build a kernel of the given kind.

    Parameters are kind-specific: ``size`` (average), ``size``/``sigma``
    (gaussian), ``radius`` (disk), ``length``/``angle`` degrees (motion);
    omitted ones fall back to the conventional defaults.
    """
    if kind == "average":
        used = {"size": int(params.pop("size", DEFAULT_AVERAGE_SIZE))}
        taps = _average_taps(used["size"])
    elif kind == "gaussian":
        used = {
            "size": int(params.pop("size", DEFAULT_GAUSSIAN_SIZE)),
            "sigma": float(params.pop("sigma", DEFAULT_GAUSSIAN_SIGMA)),
        }
        taps = _gaussian_taps(used["size"], used["sigma"])
    elif kind == "disk":
        used = {"radius": float(params.pop("radius", DEFAULT_DISK_RADIUS))}
        taps = _disk_taps(used["radius"])
    elif kind == "motion":
        used = {
            "length": int(params.pop("length", DEFAULT_MOTION_LENGTH)),
            "angle": float(params.pop("angle", DEFAULT_MOTION_ANGLE)),
        }
        taps = _motion_taps(used["length"], used["angle"])
    else:
        raise ValueError(f"kernel kind must be one of {KERNEL_KINDS}, got {kind!r}")
    if params:
        raise ValueError(f"unexpected parameters for {kind!r} kernel: {sorted(params)}")
    taps.setflags(write=False)
    return FilterKernel(taps=taps, kind=kind, params=used)


def convolve(image: RasterImage, kernel: FilterKernel) -> RasterImage:
    """Correlate every channel with the kernel (replicate padding, quantized)."""
    planes = tuple(
        quantize_clamp(ndimage.correlate(ch, kernel.taps, mode="nearest"), image.max_f)
        for ch in image.channels
    )
    return RasterImage(channels=planes, max_f=image.max_f)


def filtered_downscale(
    image: RasterImage,
    spec: ResizeSpec,
    kernel: FilterKernel,
    cache: MatrixCache | None = None,
) -> RasterImage:
    """Pre-filter then downscale; exactly the composition of the two steps."""
    if spec.target_height >= image.height or spec.target_width >= image.width:
        raise ValueError(
            "pre-filtered resizing is for downscaling only: "
            f"{image.height}x{image.width} -> {spec.target_height}x{spec.target_width}"
        )
    return resize_image(convolve(image, kernel), spec, cache=cache)
