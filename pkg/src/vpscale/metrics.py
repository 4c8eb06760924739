"""Quality metrics: MSE, the two PSNR definitions, luma conversion and SSIM.

PSNR comes in two flavours: over the mean of per-channel MSEs, and over the
MSE of the luma planes obtained by the BT.601 studio-range weighted average of
the RGB channels.  SSIM is evaluated on the luma planes, either as one global
index over the whole plane or as the mean of a Gaussian-windowed local index
(11x11, sigma 1.5), which is what mainstream implementations report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .resize import RasterImage


@dataclass(frozen=True)
class LumaCoefficients:
    """Channel weights and offset of the luma conversion, in 8-bit units."""

    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float


# ITU-R BT.601 studio-range (16..235) luma coefficients for 8-bit samples;
# the offset is rescaled by max_f/255 for other bit depths.
BT601_STUDIO = LumaCoefficients(
    alpha1=0.256788, alpha2=0.504129, alpha3=0.097906, alpha4=16.0
)


@dataclass(frozen=True)
class SsimParams:
    """Stabilisers and evaluation mode for the structural similarity index."""

    c1: float
    c2: float
    dynamic_range: int
    mode: str = "windowed"
    window_size: int = 11
    window_sigma: float = 1.5

    def __post_init__(self) -> None:
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("ssim stabilisers c1, c2 must be > 0")
        if self.mode not in ("global", "windowed"):
            raise ValueError(f"ssim mode must be 'global' or 'windowed', got {self.mode!r}")
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ValueError(f"ssim window size must be odd and >= 1, got {self.window_size}")

    @classmethod
    def for_range(
        cls, dynamic_range: int, mode: str = "windowed", paper_constants: bool = False
    ) -> "SsimParams":
        """Default stabilisers for a dynamic range L.

        The customary constants are c1 = (0.01 L)^2 and c2 = (0.03 L)^2;
        ``paper_constants`` selects the unsquared variants 0.01 L and 0.03 L.
        """
        if paper_constants:
            return cls(c1=0.01 * dynamic_range, c2=0.03 * dynamic_range,
                       dynamic_range=dynamic_range, mode=mode)
        return cls(c1=(0.01 * dynamic_range) ** 2, c2=(0.03 * dynamic_range) ** 2,
                   dynamic_range=dynamic_range, mode=mode)


@dataclass(frozen=True)
class QualityReport:
    """One measurement of an output image against its reference."""

    mse_mean_channel: float
    psnr_mean_channel: float
    mse_luma: float
    psnr_luma: float
    ssim: float
    theta_used: float
    elapsed_s: float


def _check_planes(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("planes must be 2-D")
    if a.shape != b.shape:
        raise ValueError(f"plane shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared error between two planes (squared Frobenius norm / count)."""
    a, b = _check_planes(a, b)
    d = a - b
    return float(np.mean(d * d))


def _check_images(a: RasterImage, b: RasterImage) -> None:
    if (a.height, a.width) != (b.height, b.width):
        raise ValueError(
            f"image sizes differ: {a.height}x{a.width} vs {b.height}x{b.width}"
        )
    if a.num_channels != b.num_channels:
        raise ValueError(
            f"channel counts differ: {a.num_channels} vs {b.num_channels}"
        )


def mean_channel_mse(a: RasterImage, b: RasterImage) -> float:
    """Arithmetic mean of the per-channel MSEs (any equal channel count)."""
    _check_images(a, b)
    return float(np.mean([mse(ca, cb) for ca, cb in zip(a.channels, b.channels)]))


def mse_color(a: RasterImage, b: RasterImage) -> float:
    """Mean of the three per-channel MSEs of a pair of RGB images."""
    if a.num_channels != 3 or b.num_channels != 3:
        raise ValueError("mse_color expects 3-channel images")
    return mean_channel_mse(a, b)


def _psnr_from_mse(mse_value: float, max_f: int) -> float:
    if mse_value < 0:
        raise ValueError(f"mse must be >= 0, got {mse_value}")
    if mse_value == 0.0:
        return math.inf
    return 20.0 * math.log10(max_f / math.sqrt(mse_value))


def psnr_mean_channel(a: RasterImage, b: RasterImage, max_f: int | None = None) -> float:
    """PSNR in dB over the mean-channel MSE; +inf for identical images."""
    _check_images(a, b)
    return _psnr_from_mse(mean_channel_mse(a, b), a.max_f if max_f is None else max_f)


def rgb_to_luma(image: RasterImage, coeffs: LumaCoefficients = BT601_STUDIO) -> np.ndarray:
    """Luma plane of an RGB image: weighted channel average plus offset.

    The result is real-valued (not quantized).  The offset is specified for
    8-bit samples and is rescaled by ``max_f / 255`` for deeper images.
    """
    if image.num_channels != 3:
        raise ValueError(f"luma conversion expects 3 channels, got {image.num_channels}")
    r, g, b = image.channels
    offset = coeffs.alpha4 * image.max_f / 255.0
    return coeffs.alpha1 * r + coeffs.alpha2 * g + coeffs.alpha3 * b + offset


def _luma_plane(image: RasterImage) -> np.ndarray:
    """Luma for metric purposes: single channel as-is, RGB(A) via the first three."""
    if image.num_channels == 1:
        return image.channels[0]
    rgb = image if image.num_channels == 3 else RasterImage(image.channels[:3], image.max_f)
    return rgb_to_luma(rgb)


def psnr_luma(a: RasterImage, b: RasterImage, max_f: int | None = None) -> float:
    """PSNR in dB over the luma-plane MSE; +inf when the luma planes agree."""
    _check_images(a, b)
    if a.num_channels != 3:
        raise ValueError("luma PSNR expects 3-channel images")
    value = mse(rgb_to_luma(a), rgb_to_luma(b))
    return _psnr_from_mse(value, a.max_f if max_f is None else max_f)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    w = np.outer(g, g)
    return w / w.sum()


def _local_mean(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    half = window.shape[0] // 2
    full = ndimage.correlate(plane, window, mode="constant")
    if half == 0:
        return full
    return full[half:-half, half:-half]


def _ssim_planes(a: np.ndarray, b: np.ndarray, params: SsimParams) -> float:
    a, b = _check_planes(a, b)
    c1, c2 = params.c1, params.c2
    if params.mode == "global":
        mu_a, mu_b = a.mean(), b.mean()
        var_a = np.mean((a - mu_a) ** 2)
        var_b = np.mean((b - mu_b) ** 2)
        cov = np.mean((a - mu_a) * (b - mu_b))
        num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
        den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
        return float(num / den)
    size = min(params.window_size, a.shape[0], a.shape[1])
    if size % 2 == 0:
        size -= 1
    window = _gaussian_window(size, params.window_sigma)
    mu_a = _local_mean(a, window)
    mu_b = _local_mean(b, window)
    var_a = _local_mean(a * a, window) - mu_a * mu_a
    var_b = _local_mean(b * b, window) - mu_b * mu_b
    cov = _local_mean(a * b, window) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(a: RasterImage, b: RasterImage, params: SsimParams | None = None) -> float:
    """Structural similarity of two RGB images, evaluated on their luma planes."""
    _check_images(a, b)
    if a.num_channels != 3:
        raise ValueError("ssim expects 3-channel images")
    if params is None:
        params = SsimParams.for_range(a.max_f)
    return _ssim_planes(rgb_to_luma(a), rgb_to_luma(b), params)


def compute_report(
    output: RasterImage,
    reference: RasterImage,
    theta_used: float,
    elapsed_s: float = 0.0,
    ssim_params: SsimParams | None = None,
) -> QualityReport:
    """Measure an output against its reference (works for gray and RGB(A))."""
    _check_images(output, reference)
    if ssim_params is None:
        ssim_params = SsimParams.for_range(reference.max_f)
    mse_mean = mean_channel_mse(output, reference)
    luma_out = _luma_plane(output)
    luma_ref = _luma_plane(reference)
    mse_y = mse(luma_out, luma_ref)
    return QualityReport(
        mse_mean_channel=mse_mean,
        psnr_mean_channel=_psnr_from_mse(mse_mean, reference.max_f),
        mse_luma=mse_y,
        psnr_luma=_psnr_from_mse(mse_y, reference.max_f),
        ssim=_ssim_planes(luma_out, luma_ref, ssim_params),
        theta_used=theta_used,
        elapsed_s=elapsed_s,
    )
