import numpy as np
import pytest

from shadow_bench.errors import DimensionMismatch, MissingPrediction
from shadow_bench.harness import (
    RunConfig,
    compute_stats,
    evaluate,
    find_by_stem,
    format_report_csv,
    format_report_markdown,
    ordered_map,
    write_evaluation,
    write_stats,
)
from shadow_bench.metrics import MetricConfig, weighted_fbeta_oracle
from shadow_bench.stats import CUHK_CATEGORIES

from conftest import make_fixture_dataset, write_png


def run_cfg(gt, pred, manifest, **kw):
    return RunConfig(gt_dir=gt, manifest=manifest, pred_dir=pred, **kw)


def test_ordered_map_preserves_order():
    items = list(range(50))
    assert list(ordered_map(lambda x: x * x, items, threads=4, window=3)) == [x * x for x in items]
    assert list(ordered_map(lambda x: -x, items, threads=1)) == [-x for x in items]


def test_find_by_stem(tmp_path):
    write_png(tmp_path / "a" / "img.png", np.zeros((2, 2)))
    assert find_by_stem(tmp_path, "a/img.jpg") == tmp_path / "a" / "img.png"
    assert find_by_stem(tmp_path, "a/none.jpg") is None


def test_report_matches_per_image_oracle(fixture_dataset):
    gt_dir, pred_dir, manifest, arrays = fixture_dataset
    report = evaluate(run_cfg(gt_dir, pred_dir, manifest))
    cfg = MetricConfig()
    by_cat = {c: [] for c in CUHK_CATEGORIES}
    for rel, (gt, codes) in arrays.items():
        pred = codes / 255.0
        fb = weighted_fbeta_oracle(pred, gt, cfg)
        q = pred >= 0.5
        g = gt.astype(bool)
        counts = (int((q & g).sum()), int((~q & ~g).sum()), int((q & ~g).sum()), int((~q & g).sum()))
        by_cat[rel.split("/")[0]].append((fb, counts))

    def ber_of(tp, tn, fp, fn):
        return (1 - 0.5 * (tp / (tp + fn) + tn / (tn + fp))) * 100

    all_rows = []
    for cat, rows in by_cat.items():
        s = report.per_category[cat]
        assert s.image_count == 4 and s.skipped == 0
        assert s.fbeta_mean == pytest.approx(sum(r[0] for r in rows) / 4, abs=1e-9)
        tot = np.sum([r[1] for r in rows], axis=0)
        assert s.ber_accumulated == pytest.approx(ber_of(*tot), abs=1e-9)
        assert s.ber_per_image_mean == pytest.approx(np.mean([ber_of(*r[1]) for r in rows]), abs=1e-9)
        all_rows += rows
    assert report.overall.image_count == 20
    assert report.overall.fbeta_mean == pytest.approx(np.mean([r[0] for r in all_rows]), abs=1e-9)
    tot = np.sum([r[1] for r in all_rows], axis=0)
    assert report.overall.ber_accumulated == pytest.approx(ber_of(*tot), abs=1e-9)


def test_overall_is_weighted_mean_of_categories(fixture_dataset):
    gt_dir, pred_dir, manifest, _ = fixture_dataset
    report = evaluate(run_cfg(gt_dir, pred_dir, manifest))
    cats = report.per_category.values()
    assert sum(s.image_count for s in cats) == report.overall.image_count
    weighted = sum(s.fbeta_mean * s.fbeta_images for s in cats) / sum(s.fbeta_images for s in cats)
    assert report.overall.fbeta_mean == pytest.approx(weighted, abs=1e-12)
    for s in list(cats) + [report.overall]:
        assert 0 <= s.fbeta_mean <= 1 and 0 <= s.ber_accumulated <= 100


@pytest.mark.parametrize("mode, fbeta, ber", [("identical", 1.0, 0.0), ("complement", 0.0, 100.0)])
def test_identical_and_complement(tmp_path, mode, fbeta, ber):
    gt, pred, manifest, _ = make_fixture_dataset(tmp_path, pred_mode=mode, per_category=2)
    o = evaluate(run_cfg(gt, pred, manifest)).overall
    assert o.image_count == 10
    assert o.fbeta_mean == fbeta
    assert o.ber_accumulated == ber


def test_empty_gt_is_skipped_but_counted(tmp_path):
    write_png(tmp_path / "gt/c/a.png", np.zeros((6, 6)))
    write_png(tmp_path / "pred/c/a.png", np.zeros((6, 6)))
    full = np.zeros((6, 6))
    full[1:4, 1:4] = 255
    write_png(tmp_path / "gt/c/b.png", full)
    write_png(tmp_path / "pred/c/b.png", full)
    (tmp_path / "m.csv").write_text("path,category,split\nc/a.png,c,test\nc/b.png,c,test\n")
    r = evaluate(run_cfg(tmp_path / "gt", tmp_path / "pred", tmp_path / "m.csv"))
    s = r.per_category["c"]
    assert s.image_count == 2 and s.fbeta_images == 1 and s.skipped == 1
    assert s.fbeta_mean == 1.0 and s.ber_accumulated == 0.0
    # the single-class image has no per-image BER
    assert s.ber_per_image_mean == 0.0
    assert [x.path for x in r.skipped] == ["c/a.png"]


def test_missing_prediction(fixture_dataset):
    gt_dir, pred_dir, manifest, _ = fixture_dataset
    (pred_dir / "Shadow-ADE" / "img_001.png").unlink()
    with pytest.raises(MissingPrediction):
        evaluate(run_cfg(gt_dir, pred_dir, manifest))
    r = evaluate(run_cfg(gt_dir, pred_dir, manifest, skip_errors=True))
    assert r.overall.image_count == 19 and r.overall.skipped == 1
    assert r.skipped[0].status == "error"


def test_dimension_mismatch_and_resize(tmp_path):
    gt = np.zeros((8, 8))
    gt[2:6, 2:6] = 255
    write_png(tmp_path / "gt/x.png", gt)
    big = np.zeros((16, 16))
    big[4:12, 4:12] = 255
    write_png(tmp_path / "pred/x.png", big)
    (tmp_path / "m.csv").write_text("path,category,split\nx.png,c,test\n")
    with pytest.raises(DimensionMismatch):
        evaluate(run_cfg(tmp_path / "gt", tmp_path / "pred", tmp_path / "m.csv"))
    r = evaluate(run_cfg(tmp_path / "gt", tmp_path / "pred", tmp_path / "m.csv", resize_pred=True))
    assert r.overall.ber_accumulated == 0.0
    r = evaluate(run_cfg(tmp_path / "gt", tmp_path / "pred", tmp_path / "m.csv", resize_pred=True, eval_size=32))
    assert r.overall.counts.total == 32 * 32


def test_split_filter(fixture_dataset):
    gt_dir, pred_dir, manifest, _ = fixture_dataset
    text = manifest.read_text().replace("img_000.jpg,Shadow-ADE,test", "img_000.jpg,Shadow-ADE,train")
    manifest.write_text(text)
    assert evaluate(run_cfg(gt_dir, pred_dir, manifest)).overall.image_count == 19
    assert evaluate(run_cfg(gt_dir, pred_dir, manifest, split=None)).overall.image_count == 20


def test_thread_count_does_not_change_output(fixture_dataset, tmp_path):
    gt_dir, pred_dir, manifest, _ = fixture_dataset
    texts = []
    for n in (1, 3, 8):
        cfg = run_cfg(gt_dir, pred_dir, manifest, threads=n, out=tmp_path / f"o{n}")
        write_evaluation(evaluate(cfg), cfg)
        texts.append(((tmp_path / f"o{n}" / "report.csv").read_bytes(), (tmp_path / f"o{n}" / "per_image.csv").read_bytes()))
    assert texts[0] == texts[1] == texts[2]


def test_report_formats(fixture_dataset):
    gt_dir, pred_dir, manifest, _ = fixture_dataset
    cfg = run_cfg(gt_dir, pred_dir, manifest)
    report = evaluate(cfg)
    csv_text = format_report_csv(report, cfg)
    lines = csv_text.splitlines()
    assert lines[0].startswith("# shadow-bench")
    assert lines[1] == "category,image_count,fbeta_images,skipped,fbeta_mean,ber_accumulated,ber_per_image_mean"
    assert lines[-1].startswith("overall,20,20,0,")
    md = format_report_markdown(report, cfg)
    o = report.overall
    assert f"| overall | 20 | {o.fbeta_mean * 100:.2f} | {o.ber_accumulated:.2f} |" in md


def _blob_mask(n_blobs):
    m = np.zeros((100, 100), dtype=np.uint8)
    for k in range(n_blobs):
        m[5 + 20 * k : 12 + 20 * k, 10:20] = 255
    return m


def test_stats_bundle(tmp_path):
    write_png(tmp_path / "gt/A/one.png", _blob_mask(2))
    write_png(tmp_path / "gt/A/two.png", _blob_mask(4))
    write_png(tmp_path / "gt/B/full.png", np.full((512, 512), 255))
    (tmp_path / "m.csv").write_text("path,category,split\nA/one.png,A,train\nA/two.png,A,test\nB/full.png,B,val\n")
    cfg = RunConfig(gt_dir=tmp_path / "gt", manifest=tmp_path / "m.csv", split=None)
    bundle = compute_stats(cfg)
    a = bundle.groups["A"].components
    assert (a.mean, a.std) == (3.0, 1.0)
    files = write_stats(bundle, tmp_path / "out")
    names = {p.name for p in files}
    assert {"region_counts.csv", "area_histogram.csv", "location_B.png", "location_overall.csv"} <= names
    assert "contrast_histogram.csv" not in names
    rc = (tmp_path / "out" / "region_counts.csv").read_text().splitlines()
    assert rc[0] == "category,mean,std"
    assert rc[2] == "A,3.0,1.0"
    from PIL import Image

    png = np.asarray(Image.open(tmp_path / "out" / "location_B.png"))
    assert png.shape == (512, 512) and np.all(png == 255)


def test_stats_with_contrast(tmp_path):
    rng = np.random.default_rng(0)
    mask = np.zeros((20, 20), dtype=np.uint8)
    mask[5:15, 5:15] = 255
    img = np.zeros((20, 20, 3), dtype=np.uint8)
    img[mask == 0] = (250, 250, 250)
    img[mask > 0] = (10, 10, 10)
    write_png(tmp_path / "gt/c/p.png", mask)
    from PIL import Image

    (tmp_path / "img/c").mkdir(parents=True)
    Image.fromarray(img).save(tmp_path / "img/c/p.jpg", quality=100)
    write_png(tmp_path / "gt/c/empty.png", np.zeros((20, 20)))
    Image.fromarray(rng.integers(0, 255, (20, 20, 3)).astype(np.uint8)).save(tmp_path / "img/c/empty.png")
    (tmp_path / "m.csv").write_text("path,category,split\nc/p.jpg,c,test\nc/empty.jpg,c,test\n")
    cfg = RunConfig(gt_dir=tmp_path / "gt", manifest=tmp_path / "m.csv", image_dir=tmp_path / "img", split=None)
    bundle = compute_stats(cfg)
    g = bundle.groups["c"]
    assert g.contrast_skipped == 1
    assert g.contrasts == [pytest.approx(1.0, abs=1e-12)]
    files = write_stats(bundle, tmp_path / "out")
    assert any(p.name == "contrast_histogram.csv" for p in files)
