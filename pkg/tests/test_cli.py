import subprocess
import sys

import numpy as np
import pytest

from shadow_bench.cli import main
from shadow_bench.stats import read_manifest

from conftest import make_fixture_dataset, write_png


def test_eval_csv_and_markdown(fixture_dataset, tmp_path, capsys):
    gt, pred, manifest, _ = fixture_dataset
    out = tmp_path / "out"
    code = main(["eval", "--pred-dir", str(pred), "--gt-dir", str(gt), "--manifest", str(manifest), "--out", str(out), "--format", "csv"])
    assert code == 0
    assert (out / "report.csv").exists() and (out / "per_image.csv").exists()
    assert "20 images" in capsys.readouterr().out
    code = main(["eval", "--pred-dir", str(pred), "--gt-dir", str(gt), "--manifest", str(manifest), "--out", str(out), "--format", "markdown", "--radius", "full"])
    assert code == 0
    assert "| Category |" in (out / "report.md").read_text()


def test_eval_byte_identical_reruns_and_threads(fixture_dataset, tmp_path, monkeypatch):
    gt, pred, manifest, _ = fixture_dataset
    base = ["eval", "--pred-dir", str(pred), "--gt-dir", str(gt), "--manifest", str(manifest)]
    assert main(base + ["--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(base + ["--out", str(tmp_path / "b"), "--threads", "8"]) == 0
    monkeypatch.setenv("SHADOW_BENCH_THREADS", "4")
    assert main(base + ["--out", str(tmp_path / "c")]) == 0
    ref = (tmp_path / "a" / "report.csv").read_bytes()
    assert ref == (tmp_path / "b" / "report.csv").read_bytes() == (tmp_path / "c" / "report.csv").read_bytes()


def test_eval_exit_codes(fixture_dataset, tmp_path, capsys):
    gt, pred, manifest, _ = fixture_dataset
    base = ["eval", "--pred-dir", str(pred), "--gt-dir", str(gt), "--manifest", str(manifest), "--out", str(tmp_path / "o")]
    assert main(base + ["--threshold", "1.5"]) == 1
    assert main(base + ["--threads", "0"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(base + ["--radius", "zero"])
    assert exc.value.code == 1
    (pred / "Shadow-WEB" / "img_002.png").unlink()
    assert main(base) == 2
    assert "no prediction" in capsys.readouterr().err
    assert main(base + ["--skip-errors"]) == 0
    assert main(["eval", "--pred-dir", str(pred), "--gt-dir", str(gt), "--manifest", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")]) == 2


def test_usage_error_without_command():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_split_command(tmp_path, capsys):
    src = tmp_path / "in.csv"
    src.write_text("path,category,split\n" + "".join(f"Shadow-ADE/{i}.jpg,Shadow-ADE,\n" for i in range(100)))
    assert main(["split", "--in", str(src), "--seed", "7", "--out", str(tmp_path / "a.csv")]) == 0
    assert "Shadow-ADE: train 70  val 10  test 20" in capsys.readouterr().out
    assert main(["split", "--in", str(src), "--seed", "7", "--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert main(["split", "--in", str(src), "--seed", "8", "--out", str(tmp_path / "c.csv")]) == 0
    a, c = read_manifest(tmp_path / "a.csv"), read_manifest(tmp_path / "c.csv")
    assert a.split_counts() == c.split_counts()
    assert [e.split for e in a.entries] != [e.split for e in c.entries]
    bad = tmp_path / "bad.csv"
    bad.write_text("nonsense\n")
    assert main(["split", "--in", str(bad), "--seed", "1", "--out", str(tmp_path / "d.csv")]) == 2


def test_stats_command_deterministic(tmp_path, capsys):
    gt, _, manifest, _ = make_fixture_dataset(tmp_path, per_category=3)
    for n in ("1", "4"):
        assert main(["stats", "--gt-dir", str(gt), "--manifest", str(manifest), "--out", str(tmp_path / f"s{n}"), "--threads", n]) == 0
    for name in ("region_counts.csv", "area_histogram.csv", "location_overall.csv", "location_overall.png", "per_image_stats.csv"):
        assert (tmp_path / "s1" / name).read_bytes() == (tmp_path / "s4" / name).read_bytes()
    assert "overall: 15 images" in capsys.readouterr().out


def test_stats_single_full_mask(tmp_path):
    write_png(tmp_path / "gt/Shadow-USR/a.png", np.full((512, 512), 255))
    (tmp_path / "m.csv").write_text("path,category,split\nShadow-USR/a.png,Shadow-USR,\n")
    assert main(["stats", "--gt-dir", str(tmp_path / "gt"), "--manifest", str(tmp_path / "m.csv"), "--out", str(tmp_path / "o")]) == 0
    from PIL import Image

    assert np.all(np.asarray(Image.open(tmp_path / "o" / "location_Shadow-USR.png")) == 255)


def test_dem_check_command(tmp_path, capsys):
    report = tmp_path / "r.csv"
    assert main(["dem-check", "--seed", "3", "--cases", "5", "--out", str(report)]) == 0
    assert len(report.read_text().splitlines()) == 1 + 5 * 5
    assert "max relative error" in capsys.readouterr().out
    assert main(["dem-check", "--cases", "0", "--out", str(report)]) == 0
    assert report.read_text().splitlines() == ["case,parameter,index,analytic,numeric,relative_error,passed"]
    assert main(["dem-check", "--cases", "-1", "--out", str(report)]) == 1


def test_dem_check_failure_exit_code(tmp_path, monkeypatch):
    import shadow_bench.cli as cli
    from shadow_bench.dem import DemGradients, dem_gradients
    from shadow_bench.gradcheck import run_dem_check

    def flipped(cache, upstream):
        g = dem_gradients(cache, upstream)
        return DemGradients(-g.fl, g.fd, g.proj_weight, g.proj_bias, g.alpha_gate)

    monkeypatch.setattr(cli, "run_dem_check", lambda seed, cases: run_dem_check(seed, cases, flipped))
    assert main(["dem-check", "--cases", "2", "--out", str(tmp_path / "r.csv")]) == 3


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "shadow_bench.cli", "dem-check", "--cases", "1", "--out", str(tmp_path / "r.csv")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
