"""Image rescaling by filtered interpolation on first-kind Chebyshev grids."""

from .grid import ChebyshevGrid, chebyshev_angles, chebyshev_grid, subset_indices
from .vp_basis import (
    MatrixCache,
    ScalingMatrix,
    VpParams,
    build_scaling_matrix,
    default_cache,
    lagrange_fundamental,
    matrix_cache_get,
    reset_default_cache,
    theta_to_m,
    vp_fundamental,
    vp_orthogonal,
)
from .resize import (
    FastPathError,
    RasterImage,
    ResizeSpec,
    downscale_odd_fast,
    odd_fast_factor,
    quantize_clamp,
    resize_image,
    resize_plane,
    scale_to_size,
)
from .prefilter import FilterKernel, convolve, filtered_downscale, make_kernel
from .metrics import (
    BT601_STUDIO,
    LumaCoefficients,
    QualityReport,
    SsimParams,
    compute_report,
    mse,
    mse_color,
    psnr_luma,
    psnr_mean_channel,
    rgb_to_luma,
    ssim,
)
from .theta_search import (
    THETA_SWEEP,
    ThetaCandidate,
    ThetaSweepResult,
    aggregate_best_theta,
    supervised_resize,
)
from .codecs import CodecError, load_image, save_image

__version__ = "0.1.0"

__all__ = [
    "BT601_STUDIO",
    "ChebyshevGrid",
    "CodecError",
    "FastPathError",
    "FilterKernel",
    "LumaCoefficients",
    "MatrixCache",
    "QualityReport",
    "RasterImage",
    "ResizeSpec",
    "ScalingMatrix",
    "SsimParams",
    "THETA_SWEEP",
    "ThetaCandidate",
    "ThetaSweepResult",
    "VpParams",
    "aggregate_best_theta",
    "build_scaling_matrix",
    "chebyshev_angles",
    "chebyshev_grid",
    "compute_report",
    "convolve",
    "default_cache",
    "downscale_odd_fast",
    "filtered_downscale",
    "lagrange_fundamental",
    "load_image",
    "make_kernel",
    "matrix_cache_get",
    "mse",
    "mse_color",
    "odd_fast_factor",
    "psnr_luma",
    "psnr_mean_channel",
    "quantize_clamp",
    "reset_default_cache",
    "resize_image",
    "resize_plane",
    "rgb_to_luma",
    "save_image",
    "scale_to_size",
    "ssim",
    "subset_indices",
    "supervised_resize",
    "theta_to_m",
    "vp_fundamental",
    "vp_orthogonal",
]
