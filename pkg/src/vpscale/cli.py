"""Command line surface: single resizes, supervised sweeps, dataset harness, basis dumps.

Exit codes: 0 success, 1 usage, 2 I/O, 3 numeric/configuration.
CSV output is UTF-8 with a header row and '.' as decimal separator; elapsed
times sit in their own column so the remaining columns are reproducible.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codecs import CodecError, load_image, save_image
from .grid import chebyshev_grid
from .metrics import QualityReport, SsimParams, compute_report
from .prefilter import KERNEL_KINDS, convolve, filtered_downscale, make_kernel
from .resize import RasterImage, ResizeSpec, resize_image, scale_to_size
from .theta_search import SELECT_METRICS, supervised_resize
from .vp_basis import lagrange_fundamental, theta_to_m, vp_fundamental

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_CONFIG = 3

RESIZE_MODES = ("up", "down", "size")

REPORT_HEADER = (
    "kind", "image_id", "source_h", "source_w", "target_h", "target_w",
    "theta", "mse", "psnr_luma", "psnr_mean", "ssim", "elapsed_s",
)
HARNESS_HEADER = (
    "kind", "image_id", "factor", "source_h", "source_w", "target_h", "target_w",
    "theta", "mse", "psnr_luma", "psnr_mean", "ssim", "elapsed_s", "skipped",
)


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


@dataclass
class JobConfig:
    """One resize / sweep / dump invocation."""

    mode: str
    input_path: Path | None = None
    output_path: Path | None = None
    scale: float | None = None
    target_height: int | None = None
    target_width: int | None = None
    theta: float = 0.5
    prefilter: str | None = None
    prefilter_params: dict = field(default_factory=dict)
    target_path: Path | None = None
    csv_path: Path | None = None
    select_metric: str = "mse-mean"
    include_zero: bool = False
    ssim_mode: str = "windowed"
    ssim_paper_constants: bool = False
    quantize_metrics: bool = True
    basis_n: int | None = None
    basis_m: int | None = None
    basis_kind: str = "vp"
    basis_ks: tuple[int, ...] | None = None
    samples: int = 500


@dataclass
class HarnessConfig:
    """Batch run over a dataset directory of target images."""

    dataset_dir: Path
    csv_path: Path
    direction: str = "down"
    factors: tuple[int, ...] = (2, 3, 4)
    input_generator: str = "self-vpi"
    inputs_dir: Path | None = None
    theta_policy: str = "fixed"
    theta: float = 0.5
    select_metric: str = "mse-mean"
    ssim_mode: str = "windowed"
    ssim_paper_constants: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.direction not in ("up", "down"):
            raise ValueError(f"direction must be 'up' or 'down', got {self.direction!r}")
        if not self.factors:
            raise ValueError("need at least one scale factor")
        if any(f < 2 for f in self.factors):
            raise ValueError(f"harness factors must be >= 2, got {self.factors}")
        if self.input_generator not in ("self-vpi", "self-lci", "provided-inputs"):
            raise ValueError(f"unknown input generator {self.input_generator!r}")
        if self.input_generator == "provided-inputs" and self.inputs_dir is None:
            raise ValueError("provided-inputs generator needs --inputs-dir")
        if self.theta_policy not in ("fixed", "sweep"):
            raise ValueError(f"theta policy must be 'fixed' or 'sweep', got {self.theta_policy!r}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: tuple[str, ...], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _ssim_params(image: RasterImage, mode: str, paper_constants: bool) -> SsimParams:
    return SsimParams.for_range(image.max_f, mode=mode, paper_constants=paper_constants)


def _report_row(kind: str, image_id: str, source: RasterImage, report: QualityReport,
                target_h: int, target_w: int, mse_value: float) -> list:
    return [
        kind, image_id, source.height, source.width, target_h, target_w,
        report.theta_used, mse_value, report.psnr_luma, report.psnr_mean_channel,
        report.ssim, report.elapsed_s,
    ]


def _resolve_target_size(config: JobConfig, image: RasterImage) -> tuple[int, int]:
    if config.mode == "size":
        if config.target_height is None or config.target_width is None:
            raise UsageError("size mode needs --height and --width")
        return config.target_height, config.target_width
    if config.scale is None:
        raise UsageError(f"{config.mode} mode needs --scale")
    return (
        scale_to_size(image.height, config.scale, config.mode),
        scale_to_size(image.width, config.scale, config.mode),
    )


def _run_resize_job(config: JobConfig) -> int:
    image = load_image(config.input_path)
    target_h, target_w = _resolve_target_size(config, image)
    spec = ResizeSpec(target_h, target_w, theta=config.theta)
    start = time.perf_counter()
    if config.prefilter:
        kernel = make_kernel(config.prefilter, **config.prefilter_params)
        output = filtered_downscale(image, spec, kernel)
    else:
        output = resize_image(image, spec)
    elapsed = time.perf_counter() - start
    save_image(output, config.output_path)
    print(f"{config.output_path}: {output.height}x{output.width} (theta={config.theta})")
    if config.csv_path is not None:
        if config.target_path is None:
            raise ValueError("--csv needs --target to compare the output against")
        reference = load_image(config.target_path)
        measured = output
        if not config.quantize_metrics:
            source = convolve(image, kernel) if config.prefilter else image
            measured = resize_image(source, spec, quantize=False)
        report = compute_report(
            measured, reference, theta_used=config.theta, elapsed_s=elapsed,
            ssim_params=_ssim_params(reference, config.ssim_mode, config.ssim_paper_constants),
        )
        row = _report_row("image", str(config.input_path), image, report,
                          target_h, target_w, report.mse_mean_channel)
        _write_csv(config.csv_path, REPORT_HEADER, [row])
    return EXIT_OK


def _run_supervised_job(config: JobConfig) -> int:
    if config.target_path is None:
        raise UsageError("supervised mode needs --target")
    image = load_image(config.input_path)
    target = load_image(config.target_path)
    result = supervised_resize(
        image, target,
        select_metric=config.select_metric,
        include_zero=config.include_zero,
        ssim_params=_ssim_params(target, config.ssim_mode, config.ssim_paper_constants),
    )
    save_image(result.best_image, config.output_path)
    print(f"{config.output_path}: best theta {result.best_theta} "
          f"(mse {min(c.mse for c in result.candidates):.6g})")
    if config.csv_path is not None:
        rows = [
            _report_row("candidate", str(config.input_path), image, c.report,
                        target.height, target.width, c.mse)
            for c in result.candidates
        ]
        best = next(c for c in result.candidates if c.theta == result.best_theta)
        rows.append(_report_row("best", str(config.input_path), image, best.report,
                                target.height, target.width, best.mse))
        _write_csv(config.csv_path, REPORT_HEADER, rows)
    return EXIT_OK


def basis_dump(n: int, m: int, ks: tuple[int, ...] | None, samples: int,
               basis: str, out_path: Path) -> None:
    """Sample fundamental polynomials over [-1, 1] into a CSV for plotting.

    The sampling grid is the uniform grid of the requested size merged with
    the n node abscissae, so the interpolation pattern is visible in the dump.
    """
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    if basis not in ("vp", "lagrange"):
        raise ValueError(f"basis must be 'vp' or 'lagrange', got {basis!r}")
    if ks is None:
        ks = tuple(range(1, n + 1))
    grid = chebyshev_grid(n)
    for k in ks:
        if not 1 <= k <= n:
            raise ValueError(f"node index must be in [1, {n}], got {k}")
    x = np.union1d(np.linspace(-1.0, 1.0, samples), grid.nodes)
    t = np.arccos(np.clip(x, -1.0, 1.0))
    prefix = "phi" if basis == "vp" else "ell"
    columns = []
    for k in ks:
        if basis == "vp":
            columns.append(vp_fundamental(n, m, k, t))
        else:
            columns.append(lagrange_fundamental(n, k, t))
    header = ("x",) + tuple(f"{prefix}_{k}" for k in ks)
    rows = [[x[i]] + [col[i] for col in columns] for i in range(x.size)]
    _write_csv(out_path, header, rows)


def _run_basis_dump_job(config: JobConfig) -> int:
    if config.basis_n is None:
        raise UsageError("basis-dump needs --n")
    if config.basis_m is None:
        m = theta_to_m(config.basis_n, config.theta)
    else:
        m = config.basis_m
    if config.csv_path is None:
        raise UsageError("basis-dump needs --csv")
    basis_dump(config.basis_n, m, config.basis_ks, config.samples,
               config.basis_kind, config.csv_path)
    print(f"{config.csv_path}: n={config.basis_n} m={m} basis={config.basis_kind}")
    return EXIT_OK


def run_job(config: JobConfig) -> int:
    """Dispatch one job; raises on failure (the CLI maps exceptions to codes)."""
    if config.mode in RESIZE_MODES:
        return _run_resize_job(config)
    if config.mode == "supervised":
        return _run_supervised_job(config)
    if config.mode == "basis-dump":
        return _run_basis_dump_job(config)
    raise UsageError(f"unknown mode {config.mode!r}")


def _generate_harness_input(target: RasterImage, factor: int, config: HarnessConfig,
                            path: Path) -> RasterImage:
    if config.direction == "down":
        n1, n2 = factor * target.height, factor * target.width
    else:
        n1 = max(1, target.height // factor)
        n2 = max(1, target.width // factor)
    if config.input_generator == "provided-inputs":
        candidate = config.inputs_dir / f"{path.stem}_{config.direction}{factor}{path.suffix}"
        if not candidate.is_file():
            candidate = config.inputs_dir / path.name
        return load_image(candidate)
    gen_theta = 0.5 if config.input_generator == "self-vpi" else 0.0
    return resize_image(target, ResizeSpec(n1, n2, theta=gen_theta))


def _harness_one(path: Path, factor: int, config: HarnessConfig) -> list:
    target = load_image(path)
    source = _generate_harness_input(target, factor, config, path)
    ssim_params = _ssim_params(target, config.ssim_mode, config.ssim_paper_constants)
    if config.theta_policy == "sweep":
        result = supervised_resize(source, target, select_metric=config.select_metric,
                                   ssim_params=ssim_params)
        best = next(c for c in result.candidates if c.theta == result.best_theta)
        report, mse_value = best.report, best.mse
    else:
        start = time.perf_counter()
        output = resize_image(source, ResizeSpec(target.height, target.width,
                                                 theta=config.theta))
        elapsed = time.perf_counter() - start
        report = compute_report(output, target, theta_used=config.theta,
                                elapsed_s=elapsed, ssim_params=ssim_params)
        mse_value = report.mse_mean_channel
    return [
        "image", path.name, factor, source.height, source.width,
        target.height, target.width, report.theta_used, mse_value,
        report.psnr_luma, report.psnr_mean_channel, report.ssim,
        report.elapsed_s, None,
    ]


def run_harness(config: HarnessConfig) -> int:
    """Resize every dataset image at every factor and write the report CSV."""
    paths = sorted(
        p for p in config.dataset_dir.iterdir()
        if p.suffix.lower() in (".png", ".ppm", ".pgm")
    ) if config.dataset_dir.is_dir() else []
    if not paths:
        raise CodecError(f"{config.dataset_dir}: no dataset images found")
    tasks = [(path, factor) for path in paths for factor in sorted(config.factors)]
    results: dict[tuple[Path, int], list | None] = {}

    def work(task):
        path, factor = task
        try:
            return task, _harness_one(path, factor, config)
        except (CodecError, ValueError) as exc:
            print(f"warning: skipping {path} (factor {factor}): {exc}", file=sys.stderr)
            return task, None

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            for task, row in pool.map(work, tasks):
                results[task] = row
    else:
        for task in tasks:
            results[task] = work(task)[1]

    rows = [results[t] for t in tasks if results[t] is not None]
    skipped = sum(1 for t in tasks if results[t] is None)
    if rows:
        def mean_of(idx: int) -> float:
            return float(np.mean([row[idx] for row in rows]))
        summary = [
            "summary", f"{len(rows)} rows", "", "", "", "", "",
            mean_of(7), mean_of(8), mean_of(9), mean_of(10), mean_of(11),
            mean_of(12), skipped,
        ]
    else:
        summary = ["summary", "0 rows", "", "", "", "", "", "", "", "", "", "", "", skipped]
    _write_csv(config.csv_path, HARNESS_HEADER, rows + [summary])
    print(f"{config.csv_path}: {len(rows)} rows, {skipped} skipped")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse from sys.exit(2)
        raise UsageError(message)


def _add_metric_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--csv", type=Path, default=None, help="write a metrics CSV here")
    sub.add_argument("--ssim-mode", choices=("global", "windowed"), default="windowed")
    sub.add_argument("--ssim-paper-constants", action="store_true",
                     help="use unsquared SSIM stabilisers c1=0.01L, c2=0.03L")


def _add_prefilter_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--prefilter", choices=KERNEL_KINDS + ("none",), default="none")
    sub.add_argument("--prefilter-size", type=int, default=None)
    sub.add_argument("--prefilter-sigma", type=float, default=None)
    sub.add_argument("--prefilter-radius", type=float, default=None)
    sub.add_argument("--prefilter-len", type=int, default=None)
    sub.add_argument("--prefilter-angle", type=float, default=None)


def _prefilter_params(args) -> tuple[str | None, dict]:
    if args.prefilter == "none":
        return None, {}
    params = {}
    if args.prefilter in ("average", "gaussian") and args.prefilter_size is not None:
        params["size"] = args.prefilter_size
    if args.prefilter == "gaussian" and args.prefilter_sigma is not None:
        params["sigma"] = args.prefilter_sigma
    if args.prefilter == "disk" and args.prefilter_radius is not None:
        params["radius"] = args.prefilter_radius
    if args.prefilter == "motion":
        if args.prefilter_len is not None:
            params["length"] = args.prefilter_len
        if args.prefilter_angle is not None:
            params["angle"] = args.prefilter_angle
    return args.prefilter, params


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vpscale",
                     description="Image rescaling by filtered interpolation on Chebyshev grids.")
    subs = parser.add_subparsers(dest="mode", required=True)

    for mode, text in (("up", "upscale by a factor"), ("down", "downscale by a factor"),
                       ("size", "resize to an explicit size")):
        sub = subs.add_parser(mode, help=text)
        sub.add_argument("input", type=Path)
        sub.add_argument("output", type=Path)
        if mode == "size":
            sub.add_argument("--width", type=int, required=True)
            sub.add_argument("--height", type=int, required=True)
        else:
            sub.add_argument("--scale", type=float, required=True)
        sub.add_argument("--theta", type=float, default=0.5)
        sub.add_argument("--target", type=Path, default=None,
                         help="reference image for the metrics CSV")
        sub.add_argument("--no-quantize-metrics", action="store_true",
                         help="measure the un-quantized output instead")
        _add_prefilter_flags(sub)
        _add_metric_flags(sub)

    sup = subs.add_parser("supervised", help="sweep theta against a target image")
    sup.add_argument("input", type=Path)
    sup.add_argument("output", type=Path)
    sup.add_argument("--target", type=Path, required=True)
    sup.add_argument("--select-metric", choices=SELECT_METRICS, default="mse-mean")
    sup.add_argument("--include-zero", action="store_true",
                     help="add theta = 0 (Lagrange) to the sweep")
    _add_metric_flags(sup)

    har = subs.add_parser("harness", help="batch-resize a dataset and report quality")
    har.add_argument("--dataset", type=Path, required=True)
    har.add_argument("--csv", type=Path, required=True)
    har.add_argument("--direction", choices=("up", "down"), default="down")
    har.add_argument("--factors", type=str, default="2,3,4",
                     help="comma-separated integer scale factors")
    har.add_argument("--generator", choices=("self-vpi", "self-lci", "provided-inputs"),
                     default="self-vpi")
    har.add_argument("--inputs-dir", type=Path, default=None)
    har.add_argument("--theta-policy", choices=("fixed", "sweep"), default="fixed")
    har.add_argument("--theta", type=float, default=0.5)
    har.add_argument("--select-metric", choices=SELECT_METRICS, default="mse-mean")
    har.add_argument("--jobs", type=int, default=1)
    har.add_argument("--ssim-mode", choices=("global", "windowed"), default="windowed")
    har.add_argument("--ssim-paper-constants", action="store_true")

    dump = subs.add_parser("basis-dump", help="sample fundamental polynomials to CSV")
    dump.add_argument("--n", type=int, required=True)
    dump.add_argument("--m", type=int, default=None)
    dump.add_argument("--theta", type=float, default=0.5,
                      help="used to derive m when --m is absent")
    dump.add_argument("--k", type=int, nargs="+", default=None,
                      help="node indices to dump (default: all)")
    dump.add_argument("--samples", type=int, default=500)
    dump.add_argument("--basis", choices=("vp", "lagrange"), default="vp")
    dump.add_argument("--csv", type=Path, required=True)

    return parser


def _config_from_args(args) -> JobConfig:
    config = JobConfig(mode=args.mode)
    if args.mode in RESIZE_MODES:
        config.input_path = args.input
        config.output_path = args.output
        config.theta = args.theta
        config.target_path = args.target
        config.csv_path = args.csv
        config.ssim_mode = args.ssim_mode
        config.ssim_paper_constants = args.ssim_paper_constants
        config.quantize_metrics = not args.no_quantize_metrics
        config.prefilter, config.prefilter_params = _prefilter_params(args)
        if args.mode == "size":
            config.target_height = args.height
            config.target_width = args.width
        else:
            config.scale = args.scale
    elif args.mode == "supervised":
        config.input_path = args.input
        config.output_path = args.output
        config.target_path = args.target
        config.csv_path = args.csv
        config.select_metric = args.select_metric
        config.include_zero = args.include_zero
        config.ssim_mode = args.ssim_mode
        config.ssim_paper_constants = args.ssim_paper_constants
    elif args.mode == "basis-dump":
        config.basis_n = args.n
        config.basis_m = args.m
        config.theta = args.theta
        config.basis_ks = tuple(args.k) if args.k else None
        config.samples = args.samples
        config.basis_kind = args.basis
        config.csv_path = args.csv
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"vpscale: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.mode == "harness":
            factors = tuple(int(f) for f in args.factors.split(",") if f.strip())
            config = HarnessConfig(
                dataset_dir=args.dataset, csv_path=args.csv, direction=args.direction,
                factors=factors, input_generator=args.generator,
                inputs_dir=args.inputs_dir, theta_policy=args.theta_policy,
                theta=args.theta, select_metric=args.select_metric,
                ssim_mode=args.ssim_mode, ssim_paper_constants=args.ssim_paper_constants,
                jobs=args.jobs,
            )
            return run_harness(config)
        return run_job(_config_from_args(args))
    except UsageError as exc:
        print(f"vpscale: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CodecError as exc:
        print(f"vpscale: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"vpscale: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"vpscale: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
