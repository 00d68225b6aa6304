"""Image-level classification by majority vote over per-patch predictions.

An image is tiled, every patch is classified, and the image label is the
class holding the most patches. Ties fall back to the larger summed
probability mass, then to the smaller class index, so the result is
deterministic and auditable from the returned tally alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import EmptyTally
from .images import resize_bilinear
from .labels import NUM_CLASSES, ClassLabel
from .nn.model import Model, images_to_batch
from .tiler import PatchGrid, TileSpec, extract_patches


@dataclass(frozen=True)
class VoteTally:
    """Per-class patch counts plus per-class summed probabilities."""

    counts: Tuple[int, ...]
    prob_sums: Tuple[float, ...]
    total_patches: int

    def __post_init__(self) -> None:
        if len(self.counts) != NUM_CLASSES or len(self.prob_sums) != NUM_CLASSES:
            raise ValueError(f"tally needs {NUM_CLASSES} classes")
        if sum(self.counts) != self.total_patches:
            raise ValueError("counts must sum to total_patches")


def tally_from_probs(probs: np.ndarray) -> VoteTally:
    """Build a tally from an (N, 4) probability matrix; vote = row argmax."""
    if probs.ndim != 2 or probs.shape[1] != NUM_CLASSES:
        raise ValueError(f"expected (N, {NUM_CLASSES}) probabilities, got {probs.shape}")
    votes = probs.argmax(axis=1)
    counts = np.bincount(votes, minlength=NUM_CLASSES)
    prob_sums = probs.astype(np.float64).sum(axis=0)
    return VoteTally(
        counts=tuple(int(c) for c in counts),
        prob_sums=tuple(float(s) for s in prob_sums),
        total_patches=int(probs.shape[0]),
    )


def majority_vote(tally: VoteTally) -> ClassLabel:
    """Class with the most patches; ties by probability mass, then class order."""
    if tally.total_patches < 1:
        raise EmptyTally("cannot vote over zero patches")
    best = max(
        range(NUM_CLASSES),
        key=lambda c: (tally.counts[c], tally.prob_sums[c], -c),
    )
    return ClassLabel(best)


def classify_image(
    model: Model, image: np.ndarray, spec: TileSpec
) -> Tuple[ClassLabel, VoteTally, List[int], PatchGrid]:
    """Tile, classify every patch, and vote.

    Patches are bilinearly resized to the model's input resolution. The
    per-patch labels come back row-major (same order as the grid origins)
    so callers can recompute or visualize the vote.
    """
    grid, patches = extract_patches(image, spec)
    r = model.input_resolution
    resized = [resize_bilinear(p.pixels, r, r) for p in patches]
    probs = model.predict_probs(images_to_batch(resized))
    tally = tally_from_probs(probs)
    label = majority_vote(tally)
    patch_labels = [int(v) for v in probs.argmax(axis=1)]
    return label, tally, patch_labels, grid
