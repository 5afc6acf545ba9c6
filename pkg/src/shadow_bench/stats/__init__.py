from .complexity import (
    ComponentStats,
    HistogramSpec,
    LocationMap,
    PairwiseSum,
    accumulate_location_map,
    area_proportion,
    build_histogram,
    chi_square_distance,
    color_contrast,
    color_histogram,
)
from .manifest import (
    CUHK_CATEGORIES,
    DatasetManifest,
    ManifestEntry,
    parse_manifest,
    read_manifest,
    split_dataset,
    split_sizes,
    write_manifest,
)
from .regions import count_shadow_regions, label_components

__all__ = [
    "CUHK_CATEGORIES",
    "ComponentStats",
    "DatasetManifest",
    "HistogramSpec",
    "LocationMap",
    "ManifestEntry",
    "PairwiseSum",
    "accumulate_location_map",
    "area_proportion",
    "build_histogram",
    "chi_square_distance",
    "color_contrast",
    "color_histogram",
    "count_shadow_regions",
    "label_components",
    "parse_manifest",
    "read_manifest",
    "split_dataset",
    "split_sizes",
    "write_manifest",
]
