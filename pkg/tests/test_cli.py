import csv
import math

import numpy as np
import pytest

from helpers import gather_reference, random_image

from vpscale import ResizeSpec, load_image, resize_image, save_image
from vpscale.cli import main


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def workspace(tmp_path):
    rng = np.random.default_rng(70)
    nine = tmp_path / "nine.png"
    save_image(random_image(rng, 9, 9), nine)
    eight = tmp_path / "eight.png"
    save_image(random_image(rng, 8, 8), eight)
    return tmp_path, nine, eight


def test_down_odd_factor_matches_gather(workspace):
    tmp_path, nine, _ = workspace
    out = tmp_path / "small.png"
    assert main(["down", "--scale", "3", str(nine), str(out)]) == 0
    got = load_image(out)
    want = gather_reference(load_image(nine), 3)
    assert all(np.array_equal(a, b) for a, b in zip(got.channels, want.channels))


def test_up_scale_size_contract(workspace):
    tmp_path, nine, _ = workspace
    out = tmp_path / "big.png"
    assert main(["up", "--scale", "2", "--theta", "0.5", str(nine), str(out)]) == 0
    got = load_image(out)
    assert (got.height, got.width) == (18, 18)


def test_explicit_size_mode(workspace):
    tmp_path, nine, _ = workspace
    out = tmp_path / "sized.png"
    assert main(["size", "--width", "5", "--height", "7", str(nine), str(out)]) == 0
    got = load_image(out)
    assert (got.height, got.width) == (7, 5)


def test_resize_metrics_csv(workspace):
    tmp_path, nine, _ = workspace
    out = tmp_path / "small.png"
    report = tmp_path / "report.csv"
    code = main(["down", "--scale", "3", str(nine), str(out),
                 "--target", str(nine), "--csv", str(report)])
    # comparing a 3x3 output against a 9x9 target is a size mismatch
    assert code == 3
    # regenerate a valid target: the output itself
    assert main(["down", "--scale", "3", str(nine), str(out)]) == 0
    code = main(["down", "--scale", "3", str(nine), str(tmp_path / "again.png"),
                 "--target", str(out), "--csv", str(report)])
    assert code == 0
    rows = read_csv(report)
    assert len(rows) == 1
    assert rows[0]["kind"] == "image"
    assert float(rows[0]["psnr_luma"]) == math.inf
    assert float(rows[0]["ssim"]) == 1.0


def test_prefilter_flag(workspace):
    tmp_path, nine, _ = workspace
    out = tmp_path / "filtered.png"
    code = main(["down", "--scale", "3", str(nine), str(out),
                 "--prefilter", "average", "--prefilter-size", "3"])
    assert code == 0
    assert load_image(out).height == 3
    # prefilter on an upscale is a config error
    code = main(["up", "--scale", "2", str(nine), str(tmp_path / "x.png"),
                 "--prefilter", "average"])
    assert code == 3


def test_supervised_csv_has_19_candidates(workspace):
    tmp_path, _, eight = workspace
    rng = np.random.default_rng(71)
    target = tmp_path / "target.png"
    save_image(random_image(rng, 5, 5), target)
    out = tmp_path / "best.png"
    report = tmp_path / "sweep.csv"
    code = main(["supervised", str(eight), str(out),
                 "--target", str(target), "--csv", str(report)])
    assert code == 0
    rows = read_csv(report)
    candidates = [r for r in rows if r["kind"] == "candidate"]
    best = [r for r in rows if r["kind"] == "best"]
    assert len(candidates) == 19
    assert len(best) == 1
    thetas = [float(r["theta"]) for r in candidates]
    assert thetas == sorted(thetas)
    best_theta = float(best[0]["theta"])
    fresh = resize_image(load_image(eight), ResizeSpec(5, 5, theta=best_theta))
    saved = load_image(out)
    assert all(np.array_equal(a, b) for a, b in zip(saved.channels, fresh.channels))


def test_harness_odd_factor_reports_infinite_psnr(tmp_path):
    rng = np.random.default_rng(72)
    dataset = tmp_path / "data"
    dataset.mkdir()
    save_image(random_image(rng, 8, 6), dataset / "a.png")
    save_image(random_image(rng, 5, 7), dataset / "b.png")
    report = tmp_path / "harness.csv"
    code = main(["harness", "--dataset", str(dataset), "--csv", str(report),
                 "--direction", "down", "--factors", "3", "--generator", "self-vpi"])
    assert code == 0
    rows = read_csv(report)
    image_rows = [r for r in rows if r["kind"] == "image"]
    summary = [r for r in rows if r["kind"] == "summary"]
    assert len(image_rows) == 2 and len(summary) == 1
    for row in image_rows:
        assert float(row["psnr_luma"]) == math.inf
        assert float(row["ssim"]) == 1.0
    assert float(summary[0]["ssim"]) == 1.0
    assert summary[0]["skipped"] == "0"


def test_harness_upscale_rows_are_finite(tmp_path):
    rng = np.random.default_rng(73)
    dataset = tmp_path / "data"
    dataset.mkdir()
    save_image(random_image(rng, 12, 12), dataset / "a.png")
    report = tmp_path / "up.csv"
    code = main(["harness", "--dataset", str(dataset), "--csv", str(report),
                 "--direction", "up", "--factors", "3"])
    assert code == 0
    rows = [r for r in read_csv(report) if r["kind"] == "image"]
    assert len(rows) == 1
    assert rows[0]["source_h"] == "4" and rows[0]["target_h"] == "12"
    assert math.isfinite(float(rows[0]["psnr_luma"]))


def test_harness_sweep_policy(tmp_path):
    rng = np.random.default_rng(74)
    dataset = tmp_path / "data"
    dataset.mkdir()
    save_image(random_image(rng, 10, 10), dataset / "a.png")
    report = tmp_path / "sweep.csv"
    code = main(["harness", "--dataset", str(dataset), "--csv", str(report),
                 "--direction", "up", "--factors", "2", "--theta-policy", "sweep"])
    assert code == 0
    rows = [r for r in read_csv(report) if r["kind"] == "image"]
    assert float(rows[0]["theta"]) in [round(k * 0.05, 2) for k in range(1, 20)]


def test_harness_empty_directory_is_io_error(tmp_path):
    empty = tmp_path / "void"
    empty.mkdir()
    code = main(["harness", "--dataset", str(empty), "--csv", str(tmp_path / "r.csv")])
    assert code == 2


def test_harness_skips_unreadable_images(tmp_path, capsys):
    rng = np.random.default_rng(75)
    dataset = tmp_path / "data"
    dataset.mkdir()
    save_image(random_image(rng, 6, 6), dataset / "good.png")
    (dataset / "bad.png").write_bytes(b"\x89PNG nope")
    report = tmp_path / "r.csv"
    code = main(["harness", "--dataset", str(dataset), "--csv", str(report),
                 "--factors", "3"])
    assert code == 0
    assert "skipping" in capsys.readouterr().err
    rows = read_csv(report)
    summary = [r for r in rows if r["kind"] == "summary"][0]
    assert summary["skipped"] == "1"
    assert len([r for r in rows if r["kind"] == "image"]) == 1


def test_harness_determinism_excluding_elapsed(tmp_path):
    rng = np.random.default_rng(76)
    dataset = tmp_path / "data"
    dataset.mkdir()
    save_image(random_image(rng, 9, 9), dataset / "a.png")
    save_image(random_image(rng, 6, 9), dataset / "b.png")
    first, second = tmp_path / "one.csv", tmp_path / "two.csv"
    args = ["harness", "--dataset", str(dataset), "--csv", "", "--factors", "2,3"]
    for path in (first, second):
        args[4] = str(path)
        assert main(args) == 0

    def strip_elapsed(path):
        rows = read_csv(path)
        return [{k: v for k, v in row.items() if k != "elapsed_s"} for row in rows]

    assert strip_elapsed(first) == strip_elapsed(second)


def test_basis_dump_delta_pattern(tmp_path):
    report = tmp_path / "basis.csv"
    code = main(["basis-dump", "--n", "5", "--m", "4", "--csv", str(report)])
    assert code == 0
    rows = read_csv(report)
    assert set(rows[0].keys()) == {"x", "phi_1", "phi_2", "phi_3", "phi_4", "phi_5"}
    nodes = np.cos((2 * np.arange(1, 6) - 1) * np.pi / 10)
    xs = np.array([float(r["x"]) for r in rows])
    for k in range(1, 6):
        column = np.array([float(r[f"phi_{k}"]) for r in rows])
        for h, node in enumerate(nodes, start=1):
            idx = int(np.argmin(np.abs(xs - node)))
            assert abs(xs[idx] - node) < 1e-12  # node abscissae are in the dump
            want = 1.0 if h == k else 0.0
            assert abs(column[idx] - want) < 1e-11


def test_basis_dump_m_zero_equals_lagrange(tmp_path):
    vp_csv = tmp_path / "vp.csv"
    lag_csv = tmp_path / "lag.csv"
    assert main(["basis-dump", "--n", "5", "--m", "0", "--csv", str(vp_csv)]) == 0
    assert main(["basis-dump", "--n", "5", "--basis", "lagrange",
                 "--csv", str(lag_csv)]) == 0
    vp_rows = read_csv(vp_csv)
    lag_rows = read_csv(lag_csv)
    assert len(vp_rows) == len(lag_rows)
    for vp_row, lag_row in zip(vp_rows, lag_rows):
        assert vp_row["x"] == lag_row["x"]
        for k in range(1, 6):
            assert float(vp_row[f"phi_{k}"]) == pytest.approx(
                float(lag_row[f"ell_{k}"]), abs=1e-12
            )


def test_basis_dump_bounded_columns(tmp_path):
    # the figure-like configurations stay comfortably bounded
    for n, theta, ks in ((5, 0.8, None), (21, 0.4, (11,)), (21, 0.6, (11,)), (21, 0.8, (11,))):
        report = tmp_path / f"dump_{n}_{theta}.csv"
        args = ["basis-dump", "--n", str(n), "--theta", str(theta), "--csv", str(report)]
        if ks:
            args += ["--k"] + [str(k) for k in ks]
        assert main(args) == 0
        rows = read_csv(report)
        for key in rows[0]:
            if key == "x":
                continue
            column = [abs(float(r[key])) for r in rows]
            assert max(column) <= 1.5
            assert all(math.isfinite(v) for v in column)


def test_usage_errors_exit_one(workspace, capsys):
    tmp_path, nine, _ = workspace
    assert main(["down", str(nine), str(tmp_path / "o.png")]) == 1  # missing --scale
    assert main(["warp", str(nine), str(tmp_path / "o.png")]) == 1  # unknown mode
    assert main([]) == 1
    capsys.readouterr()


def test_io_errors_exit_two(tmp_path):
    code = main(["down", "--scale", "3", str(tmp_path / "missing.png"),
                 str(tmp_path / "out.png")])
    assert code == 2


def test_config_errors_exit_three(workspace):
    tmp_path, nine, _ = workspace
    assert main(["down", "--scale", "3", "--theta", "1.5",
                 str(nine), str(tmp_path / "o.png")]) == 3
    assert main(["down", "--scale", "0.5", str(nine), str(tmp_path / "o.png")]) == 3


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "vpscale" in capsys.readouterr().out


def test_harness_summary_means_match_rows(tmp_path):
    rng = np.random.default_rng(77)
    dataset = tmp_path / "data"
    dataset.mkdir()
    save_image(random_image(rng, 8, 8), dataset / "a.png")
    save_image(random_image(rng, 12, 8), dataset / "b.png")
    report = tmp_path / "r.csv"
    code = main(["harness", "--dataset", str(dataset), "--csv", str(report),
                 "--direction", "up", "--factors", "2,4"])
    assert code == 0
    rows = read_csv(report)
    image_rows = [r for r in rows if r["kind"] == "image"]
    summary = [r for r in rows if r["kind"] == "summary"][0]
    for column in ("psnr_luma", "psnr_mean", "ssim", "theta"):
        mean = sum(float(r[column]) for r in image_rows) / len(image_rows)
        assert abs(float(summary[column]) - mean) < 1e-9


def test_harness_parallel_jobs_deterministic(tmp_path):
    rng = np.random.default_rng(78)
    dataset = tmp_path / "data"
    dataset.mkdir()
    for name in ("a.png", "b.png", "c.png"):
        save_image(random_image(rng, 9, 6), dataset / name)
    serial, parallel = tmp_path / "serial.csv", tmp_path / "parallel.csv"
    base = ["harness", "--dataset", str(dataset), "--factors", "2,3"]
    assert main(base + ["--csv", str(serial), "--jobs", "1"]) == 0
    assert main(base + ["--csv", str(parallel), "--jobs", "3"]) == 0

    def strip_elapsed(path):
        return [{k: v for k, v in r.items() if k != "elapsed_s"} for r in read_csv(path)]

    assert strip_elapsed(serial) == strip_elapsed(parallel)


def test_no_quantize_metrics_flag(tmp_path):
    rng = np.random.default_rng(79)
    source = tmp_path / "in.png"
    save_image(random_image(rng, 8, 8), source)
    target = tmp_path / "t.png"
    save_image(random_image(rng, 5, 5), target)
    quantized_csv = tmp_path / "q.csv"
    raw_csv = tmp_path / "raw.csv"
    base = ["size", "--width", "5", "--height", "5", str(source), str(tmp_path / "o.png"),
            "--target", str(target)]
    assert main(base + ["--csv", str(quantized_csv)]) == 0
    assert main(base + ["--csv", str(raw_csv), "--no-quantize-metrics"]) == 0
    q_row = read_csv(quantized_csv)[0]
    raw_row = read_csv(raw_csv)[0]
    assert q_row["psnr_luma"] != raw_row["psnr_luma"]


def test_cache_size_env_var(monkeypatch):
    import vpscale

    monkeypatch.setenv("VPSCALE_CACHE_SIZE", "3")
    vpscale.reset_default_cache()
    try:
        assert vpscale.default_cache().capacity == 3
        monkeypatch.setenv("VPSCALE_CACHE_SIZE", "banana")
        vpscale.reset_default_cache()
        with pytest.raises(ValueError):
            vpscale.default_cache()
    finally:
        monkeypatch.delenv("VPSCALE_CACHE_SIZE")
        vpscale.reset_default_cache()
