"""Exact Euclidean distance transform (lower envelope of parabolas).

Two separable passes: a column sweep gives the squared vertical distance to
the nearest foreground pixel, then each row takes the lower envelope of the
parabolas rooted at the column results. All arithmetic stays on integers
represented exactly in float64, so the output is bit-identical to a brute
force ``sqrt(dx*dx + dy*dy)`` minimum.
"""

from __future__ import annotations

import numba
import numpy as np

from ..masks import as_array


@numba.njit(nogil=True, cache=True)
def _envelope_1d(f, out, v, z):
    n = f.shape[0]
    k = -1
    for q in range(n):
        fq = f[q]
        if fq == np.inf:
            continue
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -np.inf
            z[1] = np.inf
            continue
        while True:
            p = v[k]
            s = ((fq + q * q) - (f[p] + p * p)) / (2.0 * (q - p))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    if k < 0:
        for i in range(n):
            out[i] = np.inf
        return
    j = 0
    for i in range(n):
        while z[j + 1] < i:
            j += 1
        d = i - v[j]
        out[i] = d * d + f[v[j]]


@numba.njit(nogil=True, cache=True)
def squared_edt(fg):
    h, w = fg.shape
    col = np.empty((h, w), dtype=np.float64)
    # vertical pass: distance to nearest foreground in the same column
    for x in range(w):
        last = -1
        for y in range(h):
            if fg[y, x]:
                last = y
            col[y, x] = np.inf if last < 0 else float(y - last)
        last = -1
        for y in range(h - 1, -1, -1):
            if fg[y, x]:
                last = y
            if last >= 0 and last - y < col[y, x]:
                col[y, x] = float(last - y)
    for y in range(h):
        for x in range(w):
            d = col[y, x]
            col[y, x] = d * d
    out = np.empty((h, w), dtype=np.float64)
    v = np.empty(w, dtype=np.int64)
    z = np.empty(w + 1, dtype=np.float64)
    row_out = np.empty(w, dtype=np.float64)
    for y in range(h):
        _envelope_1d(col[y], row_out, v, z)
        out[y, :] = row_out
    return out


def euclidean_distance_transform(gt) -> np.ndarray:
    """Distance from every pixel to the nearest foreground pixel of ``gt``.

    Foreground pixels get 0; an all-background mask yields ``inf`` everywhere.
    Returns a float64 array of shape (height, width).
    """
    fg = np.ascontiguousarray(as_array(gt).astype(np.uint8))
    return np.sqrt(squared_edt(fg))

