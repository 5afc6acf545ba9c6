"""Dense-matrix reference for the weighted F-measure.

Everything here is deliberately literal: the N x N dependency matrix is
materialised, the distance to the foreground is minimised pixel by pixel,
and the weighted counts are summed straight from their definitions. Only
meant for small masks; it exists to check the fast path.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EmptyGroundTruth, TooLarge
from ..masks import as_array, check_same_shape
from .weighted_f import MetricConfig

DENSE_PIXEL_BUDGET = 4096


def brute_force_distance(gt) -> np.ndarray:
    """Minimum Euclidean distance to any foreground pixel; inf when there is none."""
    g = as_array(gt).astype(bool)
    h, w = g.shape
    best = np.full((h, w), np.inf)
    ys, xs = np.nonzero(g)
    yy, xx = np.mgrid[0:h, 0:w]
    for fy, fx in zip(ys.tolist(), xs.tolist()):
        dsq = ((yy - fy) ** 2 + (xx - fx) ** 2).astype(np.float64)
        np.minimum(best, dsq, out=best)
    return np.sqrt(best)


def dependency_matrix(gt, cfg: MetricConfig = MetricConfig()) -> np.ndarray:
    """Unnormalised N x N dependency matrix over row-major pixel indices."""
    g = as_array(gt).astype(bool)
    h, w = g.shape
    n = h * w
    if n > DENSE_PIXEL_BUDGET:
        raise TooLarge(f"{n} pixels exceeds the dense budget of {DENSE_PIXEL_BUDGET}")
    radius = cfg.radius_for(g.shape)
    ys, xs = np.divmod(np.arange(n), w)
    dy = ys[:, None] - ys[None, :]
    dx = xs[:, None] - xs[None, :]
    dist_sq = (dy * dy + dx * dx).astype(np.float64)
    gauss = np.exp(-dist_sq / (2.0 * cfg.sigma_sq)) / math.sqrt(2.0 * math.pi * cfg.sigma_sq)
    flat = g.ravel()
    in_window = (np.abs(dy) <= radius) & (np.abs(dx) <= radius)
    A = np.where(flat[:, None] & flat[None, :] & in_window, gauss, 0.0)
    bg = np.nonzero(~flat)[0]
    A[bg, bg] = 1.0
    return A


def weighted_fbeta_oracle(pred, gt, cfg: MetricConfig = MetricConfig()) -> float:
    check_same_shape(pred, gt, "prediction and ground truth")
    g = as_array(gt).astype(bool)
    if not g.any():
        raise EmptyGroundTruth("ground truth has no foreground pixels")
    A = dependency_matrix(g, cfg)
    G = g.ravel().astype(np.float64)
    M = np.asarray(as_array(pred), dtype=np.float64).ravel()
    E = np.abs(G - M)

    EA = A @ E
    if cfg.normalize_dependency:
        EA = EA / (A @ np.ones_like(E))

    delta = brute_force_distance(g).ravel()
    B = np.empty_like(E)
    for i in range(E.size):
        B[i] = 1.0 if G[i] == 1.0 else 2.0 - math.exp(cfg.alpha_decay * delta[i])

    Ew = np.minimum(E, EA) * B
    TP = np.sum((1.0 - Ew) * G)
    FP = np.sum(Ew * (1.0 - G))
    FN = np.sum(Ew * G)
    if TP <= 0.0:
        return 0.0
    precision = TP / (TP + FP)
    recall = TP / (TP + FN)
    b2 = cfg.beta_sq
    return float((1.0 + b2) * precision * recall / (b2 * precision + recall))
