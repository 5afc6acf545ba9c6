"""``shadow-bench`` command line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 check failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import ShadowBenchError
from .gradcheck import run_dem_check, write_report
from .harness import RunConfig, compute_stats, evaluate, write_evaluation, write_stats
from .metrics import FULL, MetricConfig
from .stats import read_manifest, split_dataset, write_manifest

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _radius(text: str):
    if text == FULL:
        return FULL
    try:
        r = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"radius must be a positive integer or 'full', got {text!r}")
    if r < 1:
        raise argparse.ArgumentTypeError("radius must be >= 1")
    return r


def _default_threads() -> int:
    env = os.environ.get("SHADOW_BENCH_THREADS")
    if not env:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shadow-bench", description="Shadow detection evaluation and dataset statistics")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="score predictions against ground truth")
    ev.add_argument("--pred-dir", type=Path, required=True)
    ev.add_argument("--gt-dir", type=Path, required=True)
    ev.add_argument("--manifest", type=Path, required=True)
    ev.add_argument("--sigma2", type=float, default=5.0)
    ev.add_argument("--beta2", type=float, default=1.0)
    ev.add_argument("--radius", type=_radius, default=None, help="Gaussian window radius or 'full' (default ceil(3 sigma))")
    ev.add_argument("--unnormalized", action="store_true", help="use the raw Gaussian density for the dependency weights")
    ev.add_argument("--threshold", type=float, default=0.5)
    ev.add_argument("--resize-pred", action="store_true")
    ev.add_argument("--skip-errors", action="store_true")
    ev.add_argument("--eval-size", type=int, default=None, help="evaluate at N x N instead of native GT size")
    ev.add_argument("--split", default="test", help="manifest split to score, or 'all'")
    ev.add_argument("--threads", type=int, default=None)
    ev.add_argument("--out", type=Path, required=True)
    ev.add_argument("--format", choices=("csv", "markdown"), default="csv")

    st = sub.add_parser("stats", help="dataset complexity statistics")
    st.add_argument("--gt-dir", type=Path, required=True)
    st.add_argument("--image-dir", type=Path, default=None)
    st.add_argument("--manifest", type=Path, required=True)
    st.add_argument("--out", type=Path, required=True)
    st.add_argument("--split", default="all")
    st.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    st.add_argument("--min-area-frac", type=float, default=0.0005)
    st.add_argument("--bins", type=int, default=10)
    st.add_argument("--threads", type=int, default=None)

    sp = sub.add_parser("split", help="assign train/val/test 7:1:2 within each category")
    sp.add_argument("--in", dest="manifest_in", type=Path, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", type=Path, required=True)

    dc = sub.add_parser("dem-check", help="finite-difference check of the gate gradients")
    dc.add_argument("--seed", type=int, default=0)
    dc.add_argument("--cases", type=int, default=100)
    dc.add_argument("--out", type=Path, required=True)
    return p


def _threads(args) -> int:
    n = args.threads if args.threads is not None else _default_threads()
    if n < 1:
        raise UsageError("--threads must be >= 1")
    return n


def _metric(args) -> MetricConfig:
    try:
        return MetricConfig(
            sigma_sq=args.sigma2,
            beta_sq=args.beta2,
            kernel_radius=args.radius,
            normalize_dependency=not args.unnormalized,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_eval(args) -> int:
    try:
        cfg = RunConfig(
            gt_dir=args.gt_dir, manifest=args.manifest, pred_dir=args.pred_dir,
            metric=_metric(args), threshold=args.threshold, resize_pred=args.resize_pred,
            skip_errors=args.skip_errors, eval_size=args.eval_size,
            split=None if args.split == "all" else args.split,
            threads=_threads(args), out=args.out, fmt=args.format,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = evaluate(cfg)
    write_evaluation(report, cfg)
    for r in report.skipped:
        print(f"skipped {r.path}: {r.message}", file=sys.stderr)
    o = report.overall
    print(
        f"{o.image_count} images: F_beta^w = {o.fbeta_mean * 100:.2f}  "
        f"BER = {o.ber_accumulated:.2f}  skipped = {o.skipped}"
    )
    return EXIT_OK


def cmd_stats(args) -> int:
    if not 0.0 <= args.min_area_frac < 1.0:
        raise UsageError("--min-area-frac must lie in [0, 1)")
    if args.bins < 1:
        raise UsageError("--bins must be positive")
    cfg = RunConfig(
        gt_dir=args.gt_dir, manifest=args.manifest, image_dir=args.image_dir,
        split=None if args.split == "all" else args.split, threads=_threads(args),
        connectivity=args.connectivity, min_area_frac=args.min_area_frac, bins=args.bins,
    )
    bundle = compute_stats(cfg)
    write_stats(bundle, args.out)
    for name, g in bundle.groups.items():
        cs = g.components
        print(f"{name}: {len(g.regions)} images, regions mean {cs.mean:.2f} std {cs.std:.2f}")
    return EXIT_OK


def cmd_split(args) -> int:
    manifest = split_dataset(read_manifest(args.manifest_in), args.seed)
    write_manifest(manifest, args.out)
    for cat, counts in manifest.split_counts().items():
        print(f"{cat}: train {counts['train']}  val {counts['val']}  test {counts['test']}")
    return EXIT_OK


def cmd_dem_check(args) -> int:
    if args.cases < 0:
        raise UsageError("--cases must be >= 0")
    rows, ok = run_dem_check(args.seed, args.cases)
    write_report(rows, args.out)
    worst = max((r.relative_error for r in rows), default=0.0)
    failed = sum(not r.passed for r in rows)
    print(f"{args.cases} cases, {len(rows)} checks, max relative error {worst:.3e}, failures {failed}")
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {"eval": cmd_eval, "stats": cmd_stats, "split": cmd_split, "dem-check": cmd_dem_check}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"shadow-bench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ShadowBenchError, OSError) as exc:
        print(f"shadow-bench: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
