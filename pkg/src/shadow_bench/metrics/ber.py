"""Confusion counts on quantized masks and the balanced error rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateClass
from ..masks import as_array, check_same_shape


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn
        )

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def both_classes(self) -> bool:
        return self.tp + self.fn > 0 and self.tn + self.fp > 0


def confusion_counts(pred, gt) -> ConfusionCounts:
    check_same_shape(pred, gt)
    p = as_array(pred).astype(bool)
    g = as_array(gt).astype(bool)
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def ber(c: ConfusionCounts) -> float:
    """Balanced error rate in percent.

    Shadow and non-shadow recall are averaged with equal weight, so the
    score does not depend on how much of the image each class covers.
    Raises DegenerateClass when either class has no ground-truth pixels.
    """
    pos = c.tp + c.fn
    neg = c.tn + c.fp
    if pos == 0 or neg == 0:
        raise DegenerateClass(
            f"BER needs both classes present (positives={pos}, negatives={neg})"
        )
    return (1.0 - 0.5 * (c.tp / pos + c.tn / neg)) * 100.0
