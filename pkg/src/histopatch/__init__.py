"""Histopathology patch-classification pipeline.

Sliding-window tiling with overlap, seeded geometric augmentation,
compound-scaled architecture generation, a minimal NN engine with
majority-vote aggregation, evaluation metrics, and a diagnosis-support
HTTP service.
"""

__version__ = "0.1.0"

from .aggregate import VoteTally, classify_image, majority_vote, tally_from_probs
from .augment import (
    AugmentParams,
    TransformDraw,
    apply_transform,
    draw_transform,
    flip,
    make_rng,
    random_augment,
    rotate,
    translate,
    zoom,
)
from .dataset import (
    Manifest,
    SplitRatios,
    SyntheticConfig,
    generate_synthetic,
    load_manifest,
    save_manifest,
    split,
)
from .labels import LABEL_NAMES, LABELS, NUM_CLASSES, ClassLabel, parse_label
from .metrics import (
    ClassMetrics,
    accuracy,
    class_metrics,
    confusion_matrix,
    normalize_rows,
    report_dict,
)
from .scaling import (
    BASE_SPEC,
    ArchSpec,
    BlockConfig,
    Multipliers,
    ScalingCoefficients,
    check_compute_constraint,
    compound_scale,
    generate_architecture,
    round_filters,
    round_repeats,
    variant_spec,
)
from .tiler import Patch, PatchGrid, TileSpec, extract_patches, grid_count

__all__ = [
    "__version__",
    "ClassLabel", "LABELS", "LABEL_NAMES", "NUM_CLASSES", "parse_label",
    "TileSpec", "Patch", "PatchGrid", "grid_count", "extract_patches",
    "AugmentParams", "TransformDraw", "flip", "rotate", "translate", "zoom",
    "draw_transform", "apply_transform", "random_augment", "make_rng",
    "ScalingCoefficients", "Multipliers", "BlockConfig", "ArchSpec",
    "BASE_SPEC", "compound_scale", "check_compute_constraint",
    "round_filters", "round_repeats", "generate_architecture", "variant_spec",
    "VoteTally", "tally_from_probs", "majority_vote", "classify_image",
    "Manifest", "SplitRatios", "SyntheticConfig", "load_manifest",
    "save_manifest", "split", "generate_synthetic",
    "confusion_matrix", "ClassMetrics", "class_metrics", "normalize_rows",
    "accuracy", "report_dict",
]
