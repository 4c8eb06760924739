"""Supervised filter-parameter search: sweep theta, keep the minimum-MSE output.

The sweep covers theta = 0.05, 0.10, ..., 0.95 (19 candidates; theta = 0 can
be added on request).  All candidates share one matrix cache, so a sweep
builds at most one scaling matrix per distinct filter degree and axis.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .metrics import QualityReport, SsimParams, compute_report, mean_channel_mse, mse, _luma_plane
from .resize import RasterImage, ResizeSpec, resize_image
from .vp_basis import MatrixCache

THETA_SWEEP = tuple(round(k * 0.05, 2) for k in range(1, 20))

SELECT_METRICS = ("mse-mean", "mse-luma")


@dataclass(frozen=True)
class ThetaCandidate:
    theta: float
    mse: float
    report: QualityReport


@dataclass(frozen=True)
class ThetaSweepResult:
    """All sweep candidates (ascending theta) plus the argmin image."""

    candidates: tuple[ThetaCandidate, ...]
    best_theta: float
    best_image: RasterImage


def _selection_mse(output: RasterImage, target: RasterImage, select_metric: str) -> float:
    if select_metric == "mse-mean":
        return mean_channel_mse(output, target)
    if select_metric == "mse-luma":
        return mse(_luma_plane(output), _luma_plane(target))
    raise ValueError(f"select metric must be one of {SELECT_METRICS}, got {select_metric!r}")


def supervised_resize(
    input_image: RasterImage,
    target: RasterImage,
    select_metric: str = "mse-mean",
    include_zero: bool = False,
    cache: MatrixCache | None = None,
    ssim_params: SsimParams | None = None,
) -> ThetaSweepResult:
    """Resize for every theta in the sweep and keep the best match to the target.

    The target image provides the output size and the reference for the MSE
    selection; ties go to the smallest theta.
    """
    if input_image.num_channels != target.num_channels:
        raise ValueError(
            f"input has {input_image.num_channels} channels, target {target.num_channels}"
        )
    if input_image.max_f != target.max_f:
        raise ValueError(f"max_f differs: input {input_image.max_f}, target {target.max_f}")
    thetas = ((0.0,) + THETA_SWEEP) if include_zero else THETA_SWEEP
    candidates = []
    best: tuple[float, float, RasterImage] | None = None  # (mse, theta, image)
    for theta in thetas:
        spec = ResizeSpec(target.height, target.width, theta=theta)
        start = time.perf_counter()
        output = resize_image(input_image, spec, cache=cache)
        elapsed = time.perf_counter() - start
        value = _selection_mse(output, target, select_metric)
        report = compute_report(output, target, theta_used=theta,
                                elapsed_s=elapsed, ssim_params=ssim_params)
        candidates.append(ThetaCandidate(theta=theta, mse=value, report=report))
        if best is None or value < best[0]:
            best = (value, theta, output)
    assert best is not None
    return ThetaSweepResult(
        candidates=tuple(candidates), best_theta=best[1], best_image=best[2]
    )


def aggregate_best_theta(results: list[ThetaSweepResult]) -> float:
    """Arithmetic mean of the winning thetas over a batch of sweeps."""
    if not results:
        raise ValueError("need at least one sweep result")
    return sum(r.best_theta for r in results) / len(results)
