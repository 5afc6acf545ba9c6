"""Connected-component labelling and the per-image shadow-region count."""

from __future__ import annotations

import math
from fractions import Fraction

import numba
import numpy as np

from ..masks import as_array


@numba.njit(nogil=True, cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(nogil=True, cache=True)
def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb
    return min(ra, rb)


@numba.njit(nogil=True, cache=True)
def _two_pass(fg, diagonal):
    h, w = fg.shape
    labels = np.zeros((h, w), dtype=np.int64)
    parent = np.zeros(h * w + 1, dtype=np.int64)
    nxt = 1
    for y in range(h):
        for x in range(w):
            if not fg[y, x]:
                continue
            cur = 0
            # already-visited neighbours: W, N and, for 8-connectivity, NW, NE
            for k in range(4):
                if k == 0:
                    ny, nx = y, x - 1
                elif k == 1:
                    ny, nx = y - 1, x
                elif k == 2:
                    if not diagonal:
                        continue
                    ny, nx = y - 1, x - 1
                else:
                    if not diagonal:
                        continue
                    ny, nx = y - 1, x + 1
                if ny < 0 or nx < 0 or nx >= w:
                    continue
                lab = labels[ny, nx]
                if lab == 0:
                    continue
                if cur == 0:
                    cur = lab
                else:
                    cur = _union(parent, cur, lab)
            if cur == 0:
                parent[nxt] = nxt
                cur = nxt
                nxt += 1
            labels[y, x] = cur
    # second pass: resolve to dense labels 1..n in raster order of first pixel
    remap = np.zeros(nxt, dtype=np.int64)
    count = 0
    for i in range(1, nxt):
        r = _find(parent, i)
        if remap[r] == 0:
            count += 1
            remap[r] = count
        remap[i] = remap[r]
    for y in range(h):
        for x in range(w):
            if labels[y, x] != 0:
                labels[y, x] = remap[labels[y, x]]
    return labels, count


def label_components(mask, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label foreground components with a union-find two-pass scan.

    Returns (labels, count); background is 0 and components are numbered
    1..count in raster order of their first pixel.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    fg = np.ascontiguousarray(as_array(mask).astype(np.uint8))
    return _two_pass(fg, connectivity == 8)


def min_region_pixels(min_area_frac: float, n_pixels: int) -> int:
    # decimal reading of the fraction so that e.g. 0.0005 * 10000 is exactly 5
    return math.ceil(Fraction(repr(float(min_area_frac))) * n_pixels)


def count_shadow_regions(gt, min_area_frac: float = 0.0005, connectivity: int = 8) -> int:
    """Number of connected shadow regions covering at least ``min_area_frac`` of the image."""
    if not 0.0 <= min_area_frac < 1.0:
        raise ValueError(f"min_area_frac must lie in [0, 1), got {min_area_frac}")
    labels, n = label_components(gt, connectivity)
    if n == 0:
        return 0
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    return int(np.count_nonzero(sizes >= min_region_pixels(min_area_frac, labels.size)))
