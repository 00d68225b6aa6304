"""Desk-scale training: synthetic data -> patches -> CNN -> majority vote.

Generates four separable texture classes, tiles every image into
overlapping 32px patches that inherit the parent label, trains a compact
model from the layer library with SGD + the stepped learning-rate
schedule, and then compares patch-level accuracy against image-level
majority-vote accuracy on the validation split. Voting over 49 patches
per image absorbs individual patch mistakes, so the image-level number
is the one that matters clinically.

Runs in about a minute on CPU.
"""

import tempfile
import time

from histopatch import SplitRatios, SyntheticConfig, TileSpec, generate_synthetic, split
from histopatch.nn.model import build_compact_cnn
from histopatch.nn.train import TrainerConfig, fit
from histopatch.pipeline import evaluate_images, patch_dataset


def main():
    with tempfile.TemporaryDirectory() as td:
        print("generating 4 x 50 synthetic 128px images ...")
        manifest = generate_synthetic(
            SyntheticConfig(images_per_class=50, image_size=128, seed=7), td)
        train_m, valid_m, test_m = split(manifest, SplitRatios(0.7, 0.2, 0.1), seed=7)
        print(f"split: {len(train_m)} train / {len(valid_m)} valid / {len(test_m)} test")

        spec = TileSpec(window=32, overlap=0.5)
        x_train, y_train, _ = patch_dataset(train_m, spec, 32)
        x_valid, y_valid, _ = patch_dataset(valid_m, spec, 32)
        print(f"tiled: {len(x_train)} training patches "
              f"({len(x_train) // len(train_m)} per image)")

        model = build_compact_cnn(num_classes=4, input_resolution=32,
                                  init_seed=7, widths=(8, 16))
        print(f"model: {model.parameter_count()} parameters")

        cfg = TrainerConfig(lr0=0.05, momentum=0.9, epochs=4, batch_size=64)
        started = time.perf_counter()
        history = fit(model, (x_train, y_train), (x_valid, y_valid), cfg, seed=7)
        print(f"trained {cfg.epochs} epochs in {time.perf_counter() - started:.0f}s")
        for h in history:
            print(f"  epoch {int(h['epoch'])}: lr {h['lr']:.3f}  "
                  f"train acc {h['train_acc']:.3f}  val acc {h['val_acc']:.3f}")

        report = evaluate_images(model, valid_m, spec)
        print(f"validation patch-level accuracy: {report['patch_accuracy']:.3f}")
        print(f"validation image-level accuracy: {report['image_accuracy']:.3f} "
              "(majority vote over 49 patches per image)")


if __name__ == "__main__":
    main()
