"""Dataset-level evaluation and statistics over a manifest.

Per-image work runs on a thread pool (the heavy kernels release the GIL);
results are consumed strictly in manifest order, so every reduction and
every output file is independent of the thread count.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import re
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, TypeVar

import numpy as np

from . import __version__
from .errors import DecodeError, DegenerateClass, DegenerateRegion, DimensionMismatch, MissingPrediction
from .masks import (
    BinaryMask,
    ProbMask,
    binarize,
    load_prob_mask,
    load_rgb_image,
    resize_array,
    resize_bilinear,
    save_gray_png,
)
from .metrics import ConfusionCounts, MetricConfig, ber, confusion_counts, weighted_fbeta
from .stats import (
    ComponentStats,
    DatasetManifest,
    ManifestEntry,
    PairwiseSum,
    area_proportion,
    build_histogram,
    color_contrast,
    count_shadow_regions,
    read_manifest,
)
from .stats.complexity import LOCATION_SIZE, HistogramSpec

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".PNG", ".jpg", ".JPG", ".jpeg", ".JPEG", ".bmp", ".tif", ".tiff")
OVERALL = "overall"

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class RunConfig:
    gt_dir: Path
    manifest: Path
    pred_dir: Optional[Path] = None
    image_dir: Optional[Path] = None
    metric: MetricConfig = MetricConfig()
    threshold: float = 0.5
    resize_pred: bool = False
    skip_errors: bool = False
    eval_size: Optional[int] = None
    split: Optional[str] = "test"
    threads: int = 1
    out: Optional[Path] = None
    fmt: str = "csv"
    connectivity: int = 8
    min_area_frac: float = 0.0005
    bins: int = 10

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.fmt not in ("csv", "markdown"):
            raise ValueError(f"unknown output format {self.fmt!r}")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1, window: int = 0) -> Iterator[R]:
    """``map`` over a thread pool, yielding in input order with bounded look-ahead."""
    if threads <= 1:
        yield from map(fn, items)
        return
    window = window or 4 * threads
    pending = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for item in items:
            pending.append(pool.submit(fn, item))
            if len(pending) >= window:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


def find_by_stem(root: Path, rel_path: str) -> Optional[Path]:
    """Locate ``root/<dir of rel_path>/<stem>.<any image extension>``."""
    rel = Path(rel_path)
    folder = Path(root) / rel.parent
    exact = Path(root) / rel
    if exact.is_file():
        return exact
    for ext in IMAGE_EXTENSIONS:
        cand = folder / (rel.stem + ext)
        if cand.is_file():
            return cand
    return None


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class ImageResult:
    path: str
    category: str
    status: str  # ok | empty_gt | error
    fbeta: Optional[float] = None
    counts: Optional[ConfusionCounts] = None
    ber: Optional[float] = None
    message: str = ""


@dataclass(frozen=True)
class CategorySummary:
    fbeta_mean: float
    ber_accumulated: float
    ber_per_image_mean: float
    image_count: int
    fbeta_images: int
    skipped: int
    counts: ConfusionCounts = ConfusionCounts()

    @classmethod
    def from_results(cls, results: list[ImageResult]) -> "CategorySummary":
        scored = [r for r in results if r.counts is not None]
        fb = [r.fbeta for r in results if r.fbeta is not None]
        per_image = [r.ber for r in results if r.ber is not None]
        counts = ConfusionCounts()
        for r in scored:
            counts = counts + r.counts
        try:
            ber_acc = ber(counts)
        except DegenerateClass:
            ber_acc = float("nan")
        return cls(
            fbeta_mean=sum(fb) / len(fb) if fb else float("nan"),
            ber_accumulated=ber_acc,
            ber_per_image_mean=sum(per_image) / len(per_image) if per_image else float("nan"),
            image_count=len(scored),
            fbeta_images=len(fb),
            skipped=len(results) - len(fb),
            counts=counts,
        )


@dataclass(frozen=True)
class EvaluationReport:
    per_category: "OrderedDict[str, CategorySummary]"
    overall: CategorySummary
    images: list[ImageResult] = field(default_factory=list)

    @property
    def skipped(self) -> list[ImageResult]:
        return [r for r in self.images if r.fbeta is None]


def _load_pair(entry: ManifestEntry, cfg: RunConfig) -> tuple[ProbMask, BinaryMask]:
    gt_path = find_by_stem(cfg.gt_dir, entry.path)
    if gt_path is None:
        raise DecodeError(Path(cfg.gt_dir) / entry.path, "ground-truth mask not found")
    pred_path = find_by_stem(cfg.pred_dir, entry.path)
    if pred_path is None:
        raise MissingPrediction(f"no prediction for {entry.path} under {cfg.pred_dir}")
    gt = binarize(load_prob_mask(gt_path), 0.5)
    pred = load_prob_mask(pred_path)
    if pred.shape != gt.shape:
        if not cfg.resize_pred:
            raise DimensionMismatch(
                f"{entry.path}: prediction {pred.shape} vs ground truth {gt.shape} (use --resize-pred)"
            )
        pred = resize_bilinear(pred, gt.width, gt.height)
    if cfg.eval_size:
        s = cfg.eval_size
        pred = resize_bilinear(pred, s, s)
        gt = binarize(ProbMask(np.clip(resize_array(gt.values, s, s), 0.0, 1.0)), 0.5)
    return pred, gt


def evaluate_entry(entry: ManifestEntry, cfg: RunConfig) -> ImageResult:
    try:
        pred, gt = _load_pair(entry, cfg)
    except (DecodeError, MissingPrediction) as exc:
        if not cfg.skip_errors:
            raise
        return ImageResult(entry.path, entry.category, "error", message=str(exc))
    counts = confusion_counts(binarize(pred, cfg.threshold), gt)
    try:
        per_image_ber = ber(counts)
    except DegenerateClass:
        per_image_ber = None
    if not gt.values.any():
        return ImageResult(
            entry.path, entry.category, "empty_gt", None, counts, per_image_ber,
            "empty ground truth; weighted F-measure skipped",
        )
    fb = weighted_fbeta(pred, gt, cfg.metric)
    return ImageResult(entry.path, entry.category, "ok", fb, counts, per_image_ber)


def summarize(results: list[ImageResult], categories: Iterable[str]) -> EvaluationReport:
    groups: "OrderedDict[str, list[ImageResult]]" = OrderedDict((c, []) for c in categories)
    for r in results:
        groups.setdefault(r.category, []).append(r)
    per_cat = OrderedDict((c, CategorySummary.from_results(rs)) for c, rs in groups.items())
    return EvaluationReport(per_cat, CategorySummary.from_results(results), list(results))


def evaluate(cfg: RunConfig, manifest: Optional[DatasetManifest] = None) -> EvaluationReport:
    if cfg.pred_dir is None:
        raise ValueError("evaluation needs a prediction directory")
    manifest = (manifest or read_manifest(cfg.manifest)).select(cfg.split)
    results = list(ordered_map(lambda e: evaluate_entry(e, cfg), manifest.entries, cfg.threads))
    n_skipped = sum(r.fbeta is None for r in results)
    if n_skipped:
        log.warning("%d of %d images skipped for the weighted F-measure", n_skipped, len(results))
    return summarize(results, manifest.categories())


SUMMARY_HEADER = (
    "category", "image_count", "fbeta_images", "skipped",
    "fbeta_mean", "ber_accumulated", "ber_per_image_mean",
)


def _metadata_line(command: str, cfg: RunConfig) -> str:
    m = cfg.metric
    radius = m.kernel_radius if m.kernel_radius is not None else "auto"
    parts = [
        f"shadow-bench {__version__} {command}",
        f"sigma2={m.sigma_sq!r}", f"beta2={m.beta_sq!r}", f"radius={radius}",
        f"normalize={int(m.normalize_dependency)}", f"threshold={cfg.threshold!r}",
        f"split={cfg.split or 'all'}", f"eval_size={cfg.eval_size or 'native'}",
    ]
    return "# " + " ".join(parts) + "\n"


def _summary_rows(report: EvaluationReport):
    for name, s in list(report.per_category.items()) + [(OVERALL, report.overall)]:
        yield name, s


def format_report_csv(report: EvaluationReport, cfg: RunConfig) -> str:
    buf = io.StringIO()
    buf.write(_metadata_line("eval", cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for name, s in _summary_rows(report):
        w.writerow((name, s.image_count, s.fbeta_images, s.skipped,
                    _fmt(s.fbeta_mean), _fmt(s.ber_accumulated), _fmt(s.ber_per_image_mean)))
    return buf.getvalue()


def _dp2(x: float, scale: float = 1.0) -> str:
    return "n/a" if math.isnan(x) else f"{x * scale:.2f}"


def format_report_markdown(report: EvaluationReport, cfg: RunConfig) -> str:
    lines = [
        "<!--" + _metadata_line("eval", cfg)[1:].rstrip() + " -->",
        "",
        "| Category | Images | F_beta^w (%) | BER | BER (per-image mean) | Skipped |",
        "|---|---:|---:|---:|---:|---:|",
    ]
    for name, s in _summary_rows(report):
        lines.append(
            f"| {name} | {s.image_count} | {_dp2(s.fbeta_mean, 100.0)} | {_dp2(s.ber_accumulated)} "
            f"| {_dp2(s.ber_per_image_mean)} | {s.skipped} |"
        )
    return "\n".join(lines) + "\n"


def format_per_image_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("path", "category", "status", "fbeta", "ber", "tp", "tn", "fp", "fn", "message"))
    for r in report.images:
        c = r.counts
        w.writerow((r.path, r.category, r.status, _fmt(r.fbeta), _fmt(r.ber),
                    *( (c.tp, c.tn, c.fp, c.fn) if c else ("", "", "", "")), r.message))
    return buf.getvalue()


def write_evaluation(report: EvaluationReport, cfg: RunConfig) -> list[Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.fmt == "csv":
        summary = out / "report.csv"
        summary.write_text(format_report_csv(report, cfg), encoding="utf-8")
    else:
        summary = out / "report.md"
        summary.write_text(format_report_markdown(report, cfg), encoding="utf-8")
    per_image = out / "per_image.csv"
    per_image.write_text(format_per_image_csv(report), encoding="utf-8")
    return [summary, per_image]


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class ImageStats:
    path: str
    category: str
    area: float
    regions: int
    location: Optional[np.ndarray]
    contrast: Optional[float]


@dataclass
class GroupStats:
    areas: list = field(default_factory=list)
    regions: list = field(default_factory=list)
    contrasts: list = field(default_factory=list)
    contrast_skipped: int = 0
    location: PairwiseSum = field(default_factory=PairwiseSum)

    def add(self, s: ImageStats) -> None:
        self.areas.append(s.area)
        self.regions.append(s.regions)
        if s.contrast is None:
            self.contrast_skipped += 1
        else:
            self.contrasts.append(s.contrast)
        self.location.add(s.location)

    @property
    def components(self) -> ComponentStats:
        return ComponentStats.from_counts(self.regions)

    def location_map(self) -> np.ndarray:
        return self.location.total() / self.location.count


@dataclass
class StatsBundle:
    groups: "OrderedDict[str, GroupStats]"
    images: list[ImageStats]
    with_contrast: bool
    bins: int = 10

    def area_histogram(self, name: str) -> HistogramSpec:
        return build_histogram(self.groups[name].areas, self.bins)

    def contrast_histogram(self, name: str) -> HistogramSpec:
        return build_histogram(self.groups[name].contrasts, self.bins)


def image_stats(entry: ManifestEntry, cfg: RunConfig) -> ImageStats:
    gt_path = find_by_stem(cfg.gt_dir, entry.path)
    if gt_path is None:
        raise DecodeError(Path(cfg.gt_dir) / entry.path, "ground-truth mask not found")
    gt = binarize(load_prob_mask(gt_path), 0.5)
    contrast = None
    if cfg.image_dir is not None:
        img_path = find_by_stem(cfg.image_dir, entry.path)
        if img_path is None:
            raise DecodeError(Path(cfg.image_dir) / entry.path, "image not found")
        try:
            contrast = color_contrast(load_rgb_image(img_path), gt)
        except DegenerateRegion:
            contrast = None
    return ImageStats(
        entry.path,
        entry.category,
        area_proportion(gt),
        count_shadow_regions(gt, cfg.min_area_frac, cfg.connectivity),
        resize_array(gt.values.astype(np.float64), LOCATION_SIZE, LOCATION_SIZE),
        contrast,
    )


def compute_stats(cfg: RunConfig, manifest: Optional[DatasetManifest] = None) -> StatsBundle:
    manifest = (manifest or read_manifest(cfg.manifest)).select(cfg.split)
    # the location-map reduction tree is fixed over the path-sorted entries
    entries = sorted(manifest.entries, key=lambda e: e.path)
    groups: "OrderedDict[str, GroupStats]" = OrderedDict((c, GroupStats()) for c in manifest.categories())
    overall = GroupStats()
    images = []
    for s in ordered_map(lambda e: image_stats(e, cfg), entries, cfg.threads):
        groups[s.category].add(s)
        overall.add(s)
        images.append(ImageStats(s.path, s.category, s.area, s.regions, None, s.contrast))
    groups[OVERALL] = overall
    return StatsBundle(groups, images, cfg.image_dir is not None, cfg.bins)


def slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def _histogram_rows(w, name: str, h: HistogramSpec) -> None:
    edges = h.edges
    norm = h.normalized
    for i in range(h.bin_count):
        w.writerow((name, repr(float(edges[i])), repr(float(edges[i + 1])), int(h.counts[i]), repr(float(norm[i]))))


def write_stats(bundle: StatsBundle, out: Path) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    order = [OVERALL] + [c for c in bundle.groups if c != OVERALL]

    def emit(name: str, text: str) -> None:
        p = out / name
        p.write_text(text, encoding="utf-8")
        written.append(p)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("category", "mean", "std"))
    for c in order:
        cs = bundle.groups[c].components
        w.writerow((c, _fmt(cs.mean), _fmt(cs.std)))
    emit("region_counts.csv", buf.getvalue())

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("path", "category", "area_proportion", "regions", "contrast"))
    for s in bundle.images:
        w.writerow((s.path, s.category, repr(s.area), s.regions, _fmt(s.contrast)))
    emit("per_image_stats.csv", buf.getvalue())

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("category", "bin_lo", "bin_hi", "count", "fraction"))
    for c in order:
        _histogram_rows(w, c, bundle.area_histogram(c))
    emit("area_histogram.csv", buf.getvalue())

    if bundle.with_contrast:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("category", "bin_lo", "bin_hi", "count", "fraction"))
        for c in order:
            _histogram_rows(w, c, bundle.contrast_histogram(c))
        emit("contrast_histogram.csv", buf.getvalue())

    for c in order:
        g = bundle.groups[c]
        if g.location.count == 0:
            continue
        cells = g.location_map()
        png = out / f"location_{slug(c)}.png"
        save_gray_png(cells, png)
        written.append(png)
        emit(
            f"location_{slug(c)}.csv",
            "".join(",".join(repr(v) for v in row) + "\n" for row in cells.tolist()),
        )
    return written
