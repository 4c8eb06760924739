"""Image resizing through the bivariate filtered-interpolation operator.

A channel plane of shape ``(n1, n2)`` is resampled to ``(N1, N2)`` by the
matrix product ``V1^T P V2``, where ``V1``/``V2`` are the per-axis scaling
matrices.  When the target grid is an exact odd-factor subgrid of the source
(``n1 = s*N1`` and ``n2 = s*N2`` with the same odd ``s``), target nodes are a
subset of source nodes and the resize degenerates to a pure index gather that
is bit-identical for every theta; that fast path is taken automatically.

Planes are plain 2-D float64 arrays; a :class:`RasterImage` bundles 1 (gray),
3 (RGB) or 4 (RGBA) equally sized planes with the maximum representable
sample value ``max_f``.  Intensities are processed in raw units (0..max_f),
never normalised, and only quantization clamps them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import subset_indices
from .vp_basis import MatrixCache, ScalingMatrix, matrix_cache_get, theta_to_m


class FastPathError(ValueError):
    """Odd-factor gather not applicable; caller should use the matrix path."""


@dataclass(frozen=True)
class RasterImage:
    """Multi-channel image: tuple of float64 planes plus the sample maximum."""

    channels: tuple[np.ndarray, ...]
    max_f: int = 255

    def __post_init__(self) -> None:
        if not 1 <= len(self.channels) <= 4:
            raise ValueError(f"expected 1..4 channels, got {len(self.channels)}")
        if self.max_f < 1:
            raise ValueError(f"max_f must be >= 1, got {self.max_f}")
        planes = tuple(np.ascontiguousarray(ch, dtype=np.float64) for ch in self.channels)
        for ch in planes:
            if ch.ndim != 2 or ch.shape[0] < 1 or ch.shape[1] < 1:
                raise ValueError(f"channel planes must be non-empty 2-D, got shape {ch.shape}")
            if ch.shape != planes[0].shape:
                raise ValueError("all channels must share the same height and width")
        object.__setattr__(self, "channels", planes)

    @property
    def height(self) -> int:
        return self.channels[0].shape[0]

    @property
    def width(self) -> int:
        return self.channels[0].shape[1]

    @property
    def num_channels(self) -> int:
        return len(self.channels)

    def is_quantized(self) -> bool:
        """True when every sample is an integer in [0, max_f]."""
        for ch in self.channels:
            if not np.all((ch >= 0) & (ch <= self.max_f) & (ch == np.floor(ch))):
                return False
        return True


@dataclass(frozen=True)
class ResizeSpec:
    """Target size plus the filter parameter theta (theta = 0 selects Lagrange)."""

    target_height: int
    target_width: int
    theta: float = 0.5

    def __post_init__(self) -> None:
        if self.target_height < 1 or self.target_width < 1:
            raise ValueError(
                f"target size must be >= 1, got {self.target_height}x{self.target_width}"
            )
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must be in [0, 1], got {self.theta}")


def quantize_clamp(plane: np.ndarray, max_f: int) -> np.ndarray:
    """Round half away from zero, then clamp to [0, max_f]."""
    if max_f < 1:
        raise ValueError(f"max_f must be >= 1, got {max_f}")
    p = np.asarray(plane, dtype=np.float64)
    rounded = np.floor(np.abs(p) + 0.5) * np.sign(p)
    return np.clip(rounded, 0.0, float(max_f)) + 0.0


def resize_plane(plane: np.ndarray, v1: ScalingMatrix, v2: ScalingMatrix) -> np.ndarray:
    """Resample one plane: ``v1.entries^T @ plane @ v2.entries`` (unclamped)."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise ValueError(f"plane must be 2-D, got shape {plane.shape}")
    if v1.source_n != plane.shape[0]:
        raise ValueError(f"row matrix expects {v1.source_n} rows, plane has {plane.shape[0]}")
    if v2.source_n != plane.shape[1]:
        raise ValueError(f"column matrix expects {v2.source_n} columns, plane has {plane.shape[1]}")
    return v1.entries.T @ plane @ v2.entries


def odd_fast_factor(source_h: int, source_w: int, target_h: int, target_w: int) -> int | None:
    """The shared odd downscale factor if the gather fast path applies, else None."""
    if target_h < 1 or target_w < 1:
        return None
    if source_h % target_h != 0 or source_w % target_w != 0:
        return None
    s = source_h // target_h
    if s != source_w // target_w or s % 2 == 0:
        return None
    return s


def downscale_odd_fast(image: RasterImage, s: int) -> RasterImage:
    """Downscale by an odd factor by gathering the shared-node pixels.

    Output pixel ``(h1, h2)`` is input pixel ``(i(h1), i(h2))`` with
    ``i(h) = (s*(2h-1)+1)/2`` (1-based); no arithmetic touches the samples.
    """
    if s < 1 or s % 2 == 0:
        raise FastPathError(f"factor must be odd and >= 1, got {s}")
    if image.height % s != 0 or image.width % s != 0:
        raise FastPathError(
            f"image {image.height}x{image.width} is not divisible by factor {s}"
        )
    rows = subset_indices(image.height, image.height // s)
    cols = subset_indices(image.width, image.width // s)
    planes = tuple(ch[np.ix_(rows, cols)] for ch in image.channels)
    return RasterImage(channels=planes, max_f=image.max_f)


def resize_image(
    image: RasterImage,
    spec: ResizeSpec,
    cache: MatrixCache | None = None,
    quantize: bool = True,
) -> RasterImage:
    """Resize every channel to the spec's target size.

    Odd-factor downscales take the exact gather path (independent of theta and
    already integer-valued); everything else goes through cached scaling
    matrices with ``m = floor(theta * n)`` per axis, followed by quantization
    unless ``quantize=False`` is requested for metric analysis.
    """
    s = odd_fast_factor(image.height, image.width, spec.target_height, spec.target_width)
    if s is not None:
        return downscale_odd_fast(image, s)
    m1 = theta_to_m(image.height, spec.theta)
    m2 = theta_to_m(image.width, spec.theta)
    get = cache.get if cache is not None else matrix_cache_get
    v1 = get(image.height, m1, spec.target_height)
    v2 = get(image.width, m2, spec.target_width)
    planes = [resize_plane(ch, v1, v2) for ch in image.channels]
    if quantize:
        planes = [quantize_clamp(p, image.max_f) for p in planes]
    return RasterImage(channels=tuple(planes), max_f=image.max_f)


def scale_to_size(n: int, factor: float, direction: str) -> int:
    """Target size along one axis for a scale factor and direction.

    Upscaling multiplies (exactly for integral factors, rounded otherwise);
    downscaling divides and floors, never below 1.
    """
    if n < 1:
        raise ValueError(f"size must be >= 1, got {n}")
    if factor < 1:
        raise ValueError(f"scale factor must be >= 1, got {factor} (direction encodes the sense)")
    if direction == "up":
        if float(factor).is_integer():
            return n * int(factor)
        return max(1, int(math.floor(n * factor + 0.5)))
    if direction == "down":
        return max(1, int(math.floor(n / factor)))
    raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
