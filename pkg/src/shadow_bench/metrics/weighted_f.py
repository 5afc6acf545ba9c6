"""Weighted F-measure for continuous foreground maps.

The error map E = |G - M| is smoothed over the ground-truth foreground with a
Gaussian dependency kernel, the pixel-wise minimum of the raw and smoothed
error is kept, and background errors are inflated with distance from the
foreground before weighted TP/FP/FN are accumulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numba
import numpy as np

from ..errors import EmptyGroundTruth
from ..masks import as_array, check_same_shape
from .edt import euclidean_distance_transform

FULL = "full"


@dataclass(frozen=True)
class MetricConfig:
    sigma_sq: float = 5.0
    beta_sq: float = 1.0
    # None means ceil(3 * sigma); "full" makes the window cover the whole image
    kernel_radius: Union[int, str, None] = None
    alpha_decay: float = math.log(0.5) / 5.0
    normalize_dependency: bool = True

    def __post_init__(self):
        if not self.sigma_sq > 0:
            raise ValueError("sigma_sq must be positive")
        if not self.beta_sq > 0:
            raise ValueError("beta_sq must be positive")
        if not self.alpha_decay < 0:
            raise ValueError("alpha_decay must be negative")
        r = self.kernel_radius
        if r is not None and r != FULL and (isinstance(r, bool) or not isinstance(r, int) or r < 1):
            raise ValueError(f"kernel_radius must be >= 1, None or 'full', got {r!r}")

    def radius_for(self, shape: tuple[int, int]) -> int:
        if self.kernel_radius == FULL:
            return max(max(shape) - 1, 1)
        if self.kernel_radius is None:
            return int(math.ceil(3.0 * math.sqrt(self.sigma_sq)))
        return int(self.kernel_radius)


@dataclass(frozen=True, eq=False)
class WeightedErrorState:
    E: np.ndarray
    EA: np.ndarray
    Delta: np.ndarray
    B: np.ndarray
    Eomega: np.ndarray


def gaussian_taps(sigma_sq: float, radius: int) -> np.ndarray:
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    return np.exp(-(k * k) / (2.0 * sigma_sq))


@numba.njit(nogil=True, cache=True)
def _separable_filter(a, taps):
    """2-D correlation with the outer product of ``taps``; zero outside."""
    h, w = a.shape
    r = (taps.shape[0] - 1) // 2
    tmp = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            lo = max(0, x - r)
            hi = min(w - 1, x + r)
            acc = 0.0
            for xx in range(lo, hi + 1):
                acc += taps[xx - x + r] * a[y, xx]
            tmp[y, x] = acc
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        lo = max(0, y - r)
        hi = min(h - 1, y + r)
        for x in range(w):
            acc = 0.0
            for yy in range(lo, hi + 1):
                acc += taps[yy - y + r] * tmp[yy, x]
            out[y, x] = acc
    return out


def gaussian_propagate(E, gt, cfg: MetricConfig = MetricConfig()) -> np.ndarray:
    """Apply the foreground dependency operator to an error map.

    At foreground pixels the result is a Gaussian-weighted combination of
    the errors at foreground pixels inside the (square) window. With
    ``cfg.normalize_dependency`` the weights are divided by their sum over
    that foreground support, making the result a weighted average; otherwise
    the raw density 1/sqrt(2 pi sigma^2) exp(-d^2 / 2 sigma^2) is used.
    Background pixels pass through unchanged.
    """
    check_same_shape(E, gt, "error map and ground truth")
    err = np.asarray(as_array(E), dtype=np.float64)
    fg = as_array(gt).astype(bool)
    taps = gaussian_taps(cfg.sigma_sq, cfg.radius_for(fg.shape))
    masked = np.where(fg, err, 0.0)
    num = _separable_filter(np.ascontiguousarray(masked), taps)
    if cfg.normalize_dependency:
        den = _separable_filter(np.ascontiguousarray(fg.astype(np.float64)), taps)
        fg_vals = num[fg] / den[fg]
    else:
        fg_vals = num[fg] / math.sqrt(2.0 * math.pi * cfg.sigma_sq)
    out = err.copy()
    out[fg] = fg_vals
    return out


def weighted_error_map(pred, gt, cfg: MetricConfig = MetricConfig()) -> WeightedErrorState:
    check_same_shape(pred, gt, "prediction and ground truth")
    g = as_array(gt).astype(bool)
    if not g.any():
        raise EmptyGroundTruth("ground truth has no foreground pixels")
    m = np.asarray(as_array(pred), dtype=np.float64)
    E = np.abs(g.astype(np.float64) - m)
    EA = gaussian_propagate(E, g, cfg)
    delta = euclidean_distance_transform(g)
    B = np.where(g, 1.0, 2.0 - np.exp(cfg.alpha_decay * delta))
    Eomega = np.minimum(E, EA) * B
    return WeightedErrorState(E=E, EA=EA, Delta=delta, B=B, Eomega=Eomega)


def fbeta_from_error(Eomega: np.ndarray, gt, beta_sq: float) -> float:
    """Weighted precision/recall/F from a weighted error map."""
    g = as_array(gt).astype(bool)
    tp = float(np.sum(1.0 - Eomega[g]))
    fp = float(np.sum(Eomega[~g]))
    fn = float(np.sum(Eomega[g]))
    if tp <= 0.0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return (1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall)


def weighted_fbeta(pred, gt, cfg: MetricConfig = MetricConfig()) -> float:
    state = weighted_error_map(pred, gt, cfg)
    return fbeta_from_error(state.Eomega, gt, cfg.beta_sq)
