"""Raster plumbing: 8-bit RGB arrays, PNG/TIFF IO, and the bilinear sampler.

Images are numpy arrays of shape (height, width, 3), dtype uint8, row-major.
All resampling in the pipeline goes through :func:`sample_bilinear`, which
uses one fixed out-of-bounds rule (edge-inclusive mirror) and one fixed
quantization rule (round half-up) so outputs are bit-reproducible.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image as PILImage


def validate_image(image: np.ndarray) -> np.ndarray:
    """Check that ``image`` is a (H, W, 3) uint8 array and return it."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 samples, got {arr.dtype}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return arr


def load_image(source: Union[str, Path, bytes]) -> np.ndarray:
    """Decode a PNG/TIFF/JPEG file or byte buffer into an RGB uint8 array."""
    if isinstance(source, bytes):
        pil = PILImage.open(io.BytesIO(source))
    else:
        pil = PILImage.open(source)
    return np.asarray(pil.convert("RGB"), dtype=np.uint8)


def save_png(image: np.ndarray, path: Union[str, Path]) -> None:
    """Write an RGB uint8 array as PNG."""
    arr = validate_image(image)
    PILImage.fromarray(arr, mode="RGB").save(path, format="PNG")


def encode_png(image: np.ndarray) -> bytes:
    """Encode an RGB uint8 array as PNG bytes."""
    arr = validate_image(image)
    buf = io.BytesIO()
    PILImage.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def reflect_index(idx: np.ndarray, size: int) -> np.ndarray:
    """Mirror out-of-range indices back into [0, size) edge-inclusively.

    The mirror repeats the edge sample: -1 -> 0, -2 -> 1, size -> size-1,
    size+1 -> size-2, extended periodically with period 2*size.
    """
    if size == 1:
        return np.zeros_like(idx)
    period = 2 * size
    m = np.mod(idx, period)
    return np.where(m < size, m, period - 1 - m)


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Round half-up to 8-bit, clipping to [0, 255]."""
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def sample_bilinear(image: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample an RGB image at float coordinates with bilinear interpolation.

    Out-of-frame coordinates are resolved via :func:`reflect_index`.
    ``xs`` and ``ys`` share a shape; returns float64 samples of shape
    ``xs.shape + (3,)``.
    """
    h, w = image.shape[:2]
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0

    x0r = reflect_index(x0, w)
    x1r = reflect_index(x0 + 1, w)
    y0r = reflect_index(y0, h)
    y1r = reflect_index(y0 + 1, h)

    img = image.astype(np.float64)
    p00 = img[y0r, x0r]
    p01 = img[y0r, x1r]
    p10 = img[y1r, x0r]
    p11 = img[y1r, x1r]

    fx = fx[..., None]
    fy = fy[..., None]
    top = p00 * (1.0 - fx) + p01 * fx
    bottom = p10 * (1.0 - fx) + p11 * fx
    return top * (1.0 - fy) + bottom * fy


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize an RGB uint8 image to (out_h, out_w) by bilinear sampling.

    Uses half-pixel-centre coordinate mapping; border samples fall back on
    the mirror rule, which at the frame edge coincides with edge clamping.
    """
    arr = validate_image(image)
    h, w = arr.shape[:2]
    if (out_h, out_w) == (h, w):
        return arr.copy()
    sx = w / out_w
    sy = h / out_h
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * sx - 0.5
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * sy - 0.5
    grid_x, grid_y = np.meshgrid(xs, ys)
    return quantize_u8(sample_bilinear(arr, grid_x, grid_y))
