"""Glue between manifests, the tiler, and the engine.

Patches inherit the label of the image they came from; image-level
evaluation re-aggregates patch predictions by majority vote, mirroring
what the diagnosis service does per upload.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from .aggregate import majority_vote, tally_from_probs
from .dataset import Manifest
from .images import load_image, resize_bilinear
from .nn.model import Model, images_to_batch
from .tiler import TileSpec, extract_patches


def patch_dataset(
    manifest: Manifest, spec: TileSpec, resolution: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tile every manifest image into a labeled patch set.

    Returns (batch, labels, image_index): an (N, 3, R, R) float32 batch,
    the inherited per-patch labels, and which manifest entry each patch
    came from (for image-level regrouping).
    """
    patches: List[np.ndarray] = []
    labels: List[int] = []
    image_index: List[int] = []
    for i, (path, label) in enumerate(manifest.entries):
        image = load_image(path)
        _, extracted = extract_patches(image, spec)
        for patch in extracted:
            pixels = patch.pixels
            if pixels.shape[0] != resolution:
                pixels = resize_bilinear(pixels, resolution, resolution)
            patches.append(pixels)
            labels.append(int(label))
            image_index.append(i)
    return (
        images_to_batch(patches),
        np.asarray(labels, dtype=np.int64),
        np.asarray(image_index, dtype=np.int64),
    )


def evaluate_images(
    model: Model, manifest: Manifest, spec: TileSpec, batch_size: int = 128
) -> dict:
    """Patch-level and image-level (majority vote) accuracy over a manifest."""
    x, y, image_index = patch_dataset(manifest, spec, model.input_resolution)
    probs = np.concatenate(
        [
            model.predict_probs(x[start : start + batch_size])
            for start in range(0, len(x), batch_size)
        ]
    )
    patch_pred = probs.argmax(axis=1)
    patch_acc = float((patch_pred == y).mean())

    image_true: List[int] = []
    image_pred: List[int] = []
    for i in range(len(manifest.entries)):
        mask = image_index == i
        tally = tally_from_probs(probs[mask])
        image_pred.append(int(majority_vote(tally)))
        image_true.append(int(manifest.entries[i][1]))
    image_acc = float(np.mean(np.asarray(image_pred) == np.asarray(image_true)))
    return {
        "patch_accuracy": patch_acc,
        "image_accuracy": image_acc,
        "image_true": image_true,
        "image_pred": image_pred,
    }
