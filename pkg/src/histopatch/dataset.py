"""Manifest ingestion, stratified splitting, and synthetic desk-scale data.

A manifest is a list of (path, label) pairs, loaded either from a
``<root>/<ClassName>/*`` directory layout or from a ``path,label`` CSV.
Splitting is stratified per class with largest-remainder rounding, so a
400-image manifest (100 per class) at ratios (0.7, 0.2, 0.1) always lands
on 280/80/40.

Patches extracted from an image inherit that image's label; training on
patches assumes the parent label describes every window.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw

from .augment import make_rng
from .errors import DuplicatePath, UnknownLabel
from .labels import LABEL_NAMES, LABELS, ClassLabel, parse_label

IMAGE_SUFFIXES = {".png", ".tif", ".tiff", ".jpg", ".jpeg"}


@dataclass(frozen=True)
class Manifest:
    entries: Tuple[Tuple[str, ClassLabel], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def counts(self) -> Dict[str, int]:
        out = {name: 0 for name in LABEL_NAMES}
        for _, label in self.entries:
            out[label.name] += 1
        return out

    def by_class(self) -> Dict[ClassLabel, List[str]]:
        out: Dict[ClassLabel, List[str]] = {label: [] for label in LABELS}
        for path, label in self.entries:
            out[label].append(path)
        return out


@dataclass(frozen=True)
class SplitRatios:
    train: float = 0.7
    valid: float = 0.2
    test: float = 0.1

    def __post_init__(self) -> None:
        if min(self.train, self.valid, self.test) < 0:
            raise ValueError("ratios must be non-negative")
        if abs(self.train + self.valid + self.test - 1.0) > 1e-9:
            raise ValueError("ratios must sum to 1")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.train, self.valid, self.test)


def _manifest_from_pairs(pairs: Sequence[Tuple[str, ClassLabel]]) -> Manifest:
    seen = set()
    for path, _ in pairs:
        if path in seen:
            raise DuplicatePath(f"manifest lists {path} twice")
        seen.add(path)
    manifest = Manifest(entries=tuple(pairs))
    for name, count in manifest.counts().items():
        if count == 0:
            warnings.warn(f"class {name} has no images", UserWarning, stacklevel=3)
    return manifest


def load_manifest(source: Union[str, Path]) -> Manifest:
    """Load a manifest from a class-directory tree or a ``path,label`` CSV."""
    src = Path(source)
    if src.is_dir():
        pairs = []
        for name in LABEL_NAMES:
            class_dir = src / name
            if not class_dir.is_dir():
                continue
            for p in sorted(class_dir.iterdir()):
                if p.suffix.lower() in IMAGE_SUFFIXES:
                    pairs.append((str(p), parse_label(name)))
        for child in sorted(src.iterdir()):
            if child.is_dir() and child.name not in LABEL_NAMES:
                raise UnknownLabel(f"directory {child.name!r} is not a class name")
        return _manifest_from_pairs(pairs)

    with open(src, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != ["path", "label"]:
            raise ValueError(f"CSV manifest must have header 'path,label', got {reader.fieldnames}")
        pairs = [(row["path"], parse_label(row["label"])) for row in reader]
    return _manifest_from_pairs(pairs)


def save_manifest(manifest: Manifest, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["path", "label"])
        for p, label in manifest.entries:
            writer.writerow([p, label.name])


def _largest_remainder(n: int, ratios: Tuple[float, ...]) -> List[int]:
    """Integer quotas for one class; ties go to the earlier split."""
    quotas = [r * n for r in ratios]
    counts = [int(q) for q in quotas]
    remainders = [q - c for q, c in zip(quotas, counts)]
    short = n - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-remainders[i], i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def split(
    manifest: Manifest, ratios: SplitRatios, seed: int
) -> Tuple[Manifest, Manifest, Manifest]:
    """Stratified split into (train, valid, test); deterministic per seed."""
    rng = make_rng(seed)
    parts: Tuple[List[Tuple[str, ClassLabel]], ...] = ([], [], [])
    for label in LABELS:
        paths = sorted(manifest.by_class()[label])
        rng.shuffle(paths)
        counts = _largest_remainder(len(paths), ratios.as_tuple())
        start = 0
        for part, count in zip(parts, counts):
            part.extend((p, label) for p in paths[start : start + count])
            start += count
    return tuple(Manifest(entries=tuple(part)) for part in parts)  # type: ignore[return-value]


def write_split(
    splits: Tuple[Manifest, Manifest, Manifest],
    ratios: SplitRatios,
    seed: int,
    out_dir: Union[str, Path],
) -> Dict[str, str]:
    """Write train/valid/test CSVs plus a JSON summary of the split."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = ("train", "valid", "test")
    files = {}
    for name, part in zip(names, splits):
        path = out / f"{name}.csv"
        save_manifest(part, path)
        files[name] = str(path)
    summary = {
        "seed": seed,
        "ratios": dict(zip(names, ratios.as_tuple())),
        "counts": {name: part.counts() for name, part in zip(names, splits)},
        "totals": {name: len(part) for name, part in zip(names, splits)},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    files["summary"] = str(out / "summary.json")
    return files


# --- synthetic data -------------------------------------------------------

# Background hue and nucleus styling per class. Chosen far apart in RGB so
# the four textures are trivially separable by color statistics, which the
# desk-scale end-to-end tests depend on.
CLASS_TEXTURES = {
    ClassLabel.Normal: {"base": (235, 200, 210), "nucleus": (150, 90, 130), "count": 6},
    ClassLabel.Benign: {"base": (190, 225, 190), "nucleus": (70, 130, 90), "count": 12},
    ClassLabel.InSitu: {"base": (170, 190, 235), "nucleus": (60, 80, 160), "count": 20},
    ClassLabel.Invasive: {"base": (120, 80, 140), "nucleus": (40, 20, 60), "count": 30},
}


@dataclass(frozen=True)
class SyntheticConfig:
    images_per_class: int = 50
    image_size: int = 128
    seed: int = 0
    noise_amplitude: int = 12
    textures: dict = field(default_factory=lambda: CLASS_TEXTURES)


def _render_texture(cfg: SyntheticConfig, label: ClassLabel, rng: np.random.Generator) -> np.ndarray:
    size = cfg.image_size
    style = cfg.textures[label]
    base = np.array(style["base"], dtype=np.float64)
    noise = rng.integers(-cfg.noise_amplitude, cfg.noise_amplitude + 1, size=(size, size, 3))
    canvas = np.clip(base[None, None, :] + noise, 0, 255).astype(np.uint8)

    pil = PILImage.fromarray(canvas, mode="RGB")
    draw = ImageDraw.Draw(pil)
    for _ in range(style["count"]):
        cx = rng.integers(0, size)
        cy = rng.integers(0, size)
        rx = int(rng.integers(max(2, size // 32), max(3, size // 10)))
        ry = int(rng.integers(max(2, size // 32), max(3, size // 10)))
        draw.ellipse((cx - rx, cy - ry, cx + rx, cy + ry), fill=tuple(style["nucleus"]))
    return np.asarray(pil, dtype=np.uint8)


def generate_synthetic(cfg: SyntheticConfig, out_dir: Union[str, Path]) -> Manifest:
    """Write four directories of seeded texture images and return the manifest.

    Identical configs produce byte-identical files: every image derives its
    own stream from (seed, class index, image index).
    """
    out = Path(out_dir)
    pairs = []
    for label in LABELS:
        class_dir = out / label.name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(cfg.images_per_class):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([cfg.seed, int(label), i]))
            )
            image = _render_texture(cfg, label, rng)
            path = class_dir / f"{label.name.lower()}_{i:04d}.png"
            PILImage.fromarray(image, mode="RGB").save(path, format="PNG")
            pairs.append((str(path), label))
    return _manifest_from_pairs(pairs)
