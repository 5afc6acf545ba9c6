from .ber import ConfusionCounts, ber, confusion_counts
from .edt import euclidean_distance_transform
from .oracle import brute_force_distance, dependency_matrix, weighted_fbeta_oracle
from .weighted_f import (
    FULL,
    MetricConfig,
    WeightedErrorState,
    gaussian_propagate,
    weighted_error_map,
    weighted_fbeta,
)

__all__ = [
    "FULL",
    "ConfusionCounts",
    "MetricConfig",
    "WeightedErrorState",
    "ber",
    "brute_force_distance",
    "confusion_counts",
    "dependency_matrix",
    "euclidean_distance_transform",
    "gaussian_propagate",
    "weighted_error_map",
    "weighted_fbeta",
    "weighted_fbeta_oracle",
]
