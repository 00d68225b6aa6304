"""Seeded geometric augmentation: zoom, rotation, shifts, flips, mirror fill.

Every transform keeps the input dimensions and fills vacated pixels by the
edge-inclusive mirror rule from :mod:`histopatch.images`, so no output
sample is ever synthesized from nothing. Interpolation is bilinear with
half-up rounding back to 8 bits. Given the same seed and parameters the
augmentation stream is byte-identical, which the training pipeline and the
CLI rely on for reproducible reruns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .images import quantize_u8, sample_bilinear, validate_image

# Stream algorithm is part of the reproducibility contract; recorded in
# configs and CLI output so reruns can verify they use the same generator.
RNG_ALGORITHM = "pcg64"


def make_rng(seed: int) -> np.random.Generator:
    """Seeded 64-bit generator used for every randomized draw in this package."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class AugmentParams:
    """Augmentation ranges; defaults mirror the training configuration."""

    zoom_range: float = 0.2
    rotation_range: float = 40.0
    width_shift: float = 0.2
    height_shift: float = 0.2
    hflip: bool = True
    vflip: bool = True
    fill: str = "reflect"

    def __post_init__(self) -> None:
        if min(self.zoom_range, self.rotation_range,
               self.width_shift, self.height_shift) < 0:
            raise ValueError("augmentation ranges must be >= 0")
        if self.rotation_range > 180:
            raise ValueError("rotation_range must be <= 180 degrees")
        if self.fill != "reflect":
            raise ValueError(f"only 'reflect' fill is supported, got {self.fill!r}")

    @classmethod
    def from_config(cls, source: Union[str, Path, dict]) -> "AugmentParams":
        """Load from a JSON config file (or parsed dict) with the canonical keys."""
        if isinstance(source, (str, Path)):
            cfg = json.loads(Path(source).read_text())
        else:
            cfg = dict(source)
        return cls(
            zoom_range=float(cfg.get("zoom_range", 0.2)),
            rotation_range=float(cfg.get("rotation_range", 40.0)),
            width_shift=float(cfg.get("width_shift_range", cfg.get("width_shift", 0.2))),
            height_shift=float(cfg.get("height_shift_range", cfg.get("height_shift", 0.2))),
            hflip=bool(cfg.get("horizontal_flip", True)),
            vflip=bool(cfg.get("vertical_flip", True)),
            fill=str(cfg.get("fill_mode", "reflect")).lower(),
        )

    def to_config(self) -> dict:
        return {
            "zoom_range": self.zoom_range,
            "rotation_range": self.rotation_range,
            "width_shift": self.width_shift,
            "height_shift": self.height_shift,
            "horizontal_flip": self.hflip,
            "vertical_flip": self.vflip,
            "fill_mode": self.fill,
            "rng": RNG_ALGORITHM,
        }


def flip(image: np.ndarray, axis: str) -> np.ndarray:
    """Mirror the image; ``axis`` is ``'horizontal'`` (x) or ``'vertical'`` (y)."""
    arr = validate_image(image)
    if axis == "horizontal":
        return arr[:, ::-1].copy()
    if axis == "vertical":
        return arr[::-1, :].copy()
    raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")


def _sample_grid(image: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    return quantize_u8(sample_bilinear(image, sx, sy))


def _centre(image: np.ndarray):
    h, w = image.shape[:2]
    return (w - 1) / 2.0, (h - 1) / 2.0


def rotate(image: np.ndarray, angle: float) -> np.ndarray:
    """Rotate about the image centre by ``angle`` degrees, same output size."""
    arr = validate_image(image)
    if angle == 0.0:
        return arr.copy()
    theta = math.radians(angle)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    h, w = arr.shape[:2]
    cx, cy = _centre(arr)
    xs = np.arange(w, dtype=np.float64) - cx
    ys = np.arange(h, dtype=np.float64) - cy
    dx, dy = np.meshgrid(xs, ys)
    sx = cx + cos_t * dx + sin_t * dy
    sy = cy - sin_t * dx + cos_t * dy
    return _sample_grid(arr, sx, sy)


def translate(image: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Shift by ``dx`` of the width and ``dy`` of the height (positive = right/down)."""
    arr = validate_image(image)
    if not (abs(dx) <= 1.0 and abs(dy) <= 1.0):
        raise ValueError("shift fractions must satisfy |dx|, |dy| <= 1")
    h, w = arr.shape[:2]
    tx = dx * w
    ty = dy * h
    if tx == 0.0 and ty == 0.0:
        return arr.copy()
    sx, sy = np.meshgrid(
        np.arange(w, dtype=np.float64) - tx,
        np.arange(h, dtype=np.float64) - ty,
    )
    return _sample_grid(arr, sx, sy)


def zoom(image: np.ndarray, factor: float) -> np.ndarray:
    """Centre-anchored rescale; factor > 1 magnifies, < 1 shrinks with mirror fill."""
    arr = validate_image(image)
    if factor <= 0:
        raise ValueError("zoom factor must be > 0")
    if factor == 1.0:
        return arr.copy()
    h, w = arr.shape[:2]
    cx, cy = _centre(arr)
    sx, sy = np.meshgrid(
        cx + (np.arange(w, dtype=np.float64) - cx) / factor,
        cy + (np.arange(h, dtype=np.float64) - cy) / factor,
    )
    return _sample_grid(arr, sx, sy)


@dataclass(frozen=True)
class TransformDraw:
    """One realized set of augmentation parameters drawn from the stream."""

    zoom_factor: float
    angle: float
    dx: float
    dy: float
    hflip: bool
    vflip: bool


def draw_transform(params: AugmentParams, rng: np.random.Generator) -> TransformDraw:
    """Consume exactly six draws in fixed order, independent of parameter values.

    The fixed layout keeps downstream draws aligned when individual ranges
    are zeroed out, so a stream position depends only on how many images
    have been augmented.
    """
    zoom_factor = float(rng.uniform(1.0 - params.zoom_range, 1.0 + params.zoom_range))
    angle = float(rng.uniform(-params.rotation_range, params.rotation_range))
    dx = float(rng.uniform(-params.width_shift, params.width_shift))
    dy = float(rng.uniform(-params.height_shift, params.height_shift))
    u_h = float(rng.uniform(0.0, 1.0))
    u_v = float(rng.uniform(0.0, 1.0))
    return TransformDraw(
        zoom_factor=zoom_factor,
        angle=angle,
        dx=dx,
        dy=dy,
        hflip=params.hflip and u_h < 0.5,
        vflip=params.vflip and u_v < 0.5,
    )


def apply_transform(image: np.ndarray, draw: TransformDraw) -> np.ndarray:
    """Apply one draw in the fixed order zoom -> rotate -> translate -> flips."""
    out = zoom(image, draw.zoom_factor)
    out = rotate(out, draw.angle)
    out = translate(out, draw.dx, draw.dy)
    if draw.hflip:
        out = flip(out, "horizontal")
    if draw.vflip:
        out = flip(out, "vertical")
    return out


def random_augment(image: np.ndarray, params: AugmentParams, seed: int) -> np.ndarray:
    """Seeded single-image augmentation; same (image, params, seed) = same bytes."""
    rng = make_rng(seed)
    return apply_transform(image, draw_transform(params, rng))
