"""Per-image and per-dataset complexity statistics of shadow masks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import DegenerateRegion, EmptyStream
from ..masks import as_array, check_same_shape, resize_array

LOCATION_SIZE = 512
COLOR_BINS_PER_CHANNEL = 8


@dataclass(frozen=True)
class ComponentStats:
    count_per_image: tuple[int, ...]
    mean: float
    std: float

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "ComponentStats":
        c = tuple(int(x) for x in counts)
        if not c:
            return cls((), float("nan"), float("nan"))
        a = np.asarray(c, dtype=np.float64)
        return cls(c, float(a.mean()), float(a.std()))


@dataclass(frozen=True, eq=False)
class LocationMap:
    cells: np.ndarray
    image_count: int


@dataclass(frozen=True, eq=False)
class HistogramSpec:
    bin_count: int
    lo: float
    hi: float
    counts: np.ndarray
    clamped: int = 0

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.bin_count + 1)

    @property
    def normalized(self) -> np.ndarray:
        total = self.counts.sum()
        if total == 0:
            return np.zeros(self.bin_count)
        return self.counts / total


def area_proportion(gt) -> float:
    g = as_array(gt)
    return float(np.count_nonzero(g)) / g.size


class PairwiseSum:
    """Streaming pairwise summation with a fixed, input-order-only tree.

    Partial sums covering aligned power-of-two blocks are merged as soon as
    two of the same size exist, so the association order depends only on
    the sequence of items, never on how they were produced.
    """

    def __init__(self):
        self._stack: list[tuple[int, np.ndarray]] = []
        self.count = 0

    def add(self, a: np.ndarray) -> None:
        level, acc = 0, np.asarray(a, dtype=np.float64)
        while self._stack and self._stack[-1][0] == level:
            _, left = self._stack.pop()
            acc = left + acc
            level += 1
        self._stack.append((level, acc))
        self.count += 1

    def total(self) -> np.ndarray:
        if not self._stack:
            raise EmptyStream("nothing to sum")
        acc = self._stack[-1][1]
        for _, left in reversed(self._stack[:-1]):
            acc = left + acc
        return acc


def resize_for_location(gt, size: int = LOCATION_SIZE) -> np.ndarray:
    return resize_array(np.asarray(as_array(gt), dtype=np.float64), size, size)


def accumulate_location_map(gts: Iterable, size: int = LOCATION_SIZE) -> LocationMap:
    """Mean of all masks after bilinear resizing to ``size`` x ``size``.

    Each cell is the fraction of images in which that location is shadow.
    """
    acc = PairwiseSum()
    for g in gts:
        acc.add(resize_for_location(g, size))
    if acc.count == 0:
        raise EmptyStream("location map needs at least one mask")
    return LocationMap(cells=acc.total() / acc.count, image_count=acc.count)


def color_histogram(pixels: np.ndarray, bins: int = COLOR_BINS_PER_CHANNEL) -> np.ndarray:
    """L1-normalised joint RGB histogram with ``bins`` levels per channel."""
    q = pixels.astype(np.int64) * bins // 256
    idx = (q[:, 0] * bins + q[:, 1]) * bins + q[:, 2]
    h = np.bincount(idx, minlength=bins**3).astype(np.float64)
    return h / h.sum()


def chi_square_distance(h1: np.ndarray, h2: np.ndarray) -> float:
    """Half chi-square distance; 0 for identical and 1 for disjoint histograms."""
    s = h1 + h2
    nz = s > 0
    return float(0.5 * np.sum((h1[nz] - h2[nz]) ** 2 / s[nz]))


def color_contrast(img, gt, bins: int = COLOR_BINS_PER_CHANNEL) -> float:
    check_same_shape(img, gt, "image and mask")
    rgb = as_array(img).reshape(-1, 3)
    g = as_array(gt).astype(bool).ravel()
    if g.all() or not g.any():
        raise DegenerateRegion("color contrast needs both shadow and non-shadow pixels")
    return chi_square_distance(color_histogram(rgb[g], bins), color_histogram(rgb[~g], bins))


def build_histogram(values: Sequence[float], bin_count: int = 10, lo: float = 0.0, hi: float = 1.0) -> HistogramSpec:
    """Uniform histogram, bins right-open except the last one.

    Values outside [lo, hi] land in the nearest edge bin and are counted in
    ``clamped``.
    """
    if bin_count < 1:
        raise ValueError("bin_count must be positive")
    if not lo < hi:
        raise ValueError("histogram range needs lo < hi")
    v = np.asarray(values, dtype=np.float64).ravel()
    outside = (v < lo) | (v > hi)
    counts, _ = np.histogram(np.clip(v, lo, hi), bins=bin_count, range=(lo, hi))
    return HistogramSpec(bin_count, float(lo), float(hi), counts.astype(np.int64), int(outside.sum()))
