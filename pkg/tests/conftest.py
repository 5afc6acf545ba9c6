from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from shadow_bench.stats import CUHK_CATEGORIES


def write_png(path: Path, arr: np.ndarray) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(arr, dtype=np.uint8)).save(path)
    return path


def square_mask(h, w, y0, x0, size):
    m = np.zeros((h, w), dtype=np.uint8)
    m[y0 : y0 + size, x0 : x0 + size] = 1
    return m


def make_fixture_dataset(root: Path, seed: int = 0, per_category: int = 4, size=(24, 32), pred_mode="noisy"):
    """Five categories of synthetic masks with predictions in mirrored trees.

    Returns (gt_dir, pred_dir, manifest_path, arrays) where ``arrays`` maps the
    manifest path to (gt {0,1} array, prediction codes 0..255).
    """
    rng = np.random.default_rng(seed)
    gt_dir, pred_dir = root / "gt", root / "pred"
    rows = ["path,category,split"]
    arrays = {}
    h, w = size
    for cat in CUHK_CATEGORIES:
        for k in range(per_category):
            gt = np.zeros((h, w), dtype=np.uint8)
            for _ in range(int(rng.integers(1, 4))):
                y, x = rng.integers(0, h - 4), rng.integers(0, w - 4)
                gh, gw = rng.integers(2, 9, size=2)
                gt[y : y + gh, x : x + gw] = 1
            if pred_mode == "identical":
                codes = gt * 255
            elif pred_mode == "complement":
                codes = (1 - gt) * 255
            else:
                soft = np.clip(gt * 0.8 + rng.normal(0.1, 0.2, size=gt.shape), 0, 1)
                codes = np.rint(soft * 255)
            rel = f"{cat}/img_{k:03d}.jpg"
            write_png(gt_dir / cat / f"img_{k:03d}.png", gt * 255)
            write_png(pred_dir / cat / f"img_{k:03d}.png", codes)
            rows.append(f"{rel},{cat},test")
            arrays[rel] = (gt, codes.astype(np.uint8))
    manifest = root / "manifest.csv"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return gt_dir, pred_dir, manifest, arrays


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixture_dataset(tmp_path):
    return make_fixture_dataset(tmp_path)
