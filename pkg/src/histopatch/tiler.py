"""Sliding-window patch extraction on a regular overlapping lattice.

A whole image is decomposed into square windows that slide left-to-right,
top-to-bottom with a fixed stride. The canonical configuration (window 512,
overlap 0.5) turns a 2048x1536 source into 35 patches on a 7x5 grid.
All functions here are pure; identical inputs give identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from .errors import ImageSmallerThanWindow, NonIntegerStride, WindowExceedsDim
from .images import save_png, validate_image

_STRIDE_TOL = 1e-9


@dataclass(frozen=True)
class TileSpec:
    """Window size, overlap fraction, and tail policy for one tiling pass.

    ``stride = window * (1 - overlap)`` must come out a positive integer;
    anything else is rejected rather than silently rounded.
    """

    window: int = 512
    overlap: float = 0.5
    include_tail: bool = False

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not (0.0 <= self.overlap < 1.0):
            raise ValueError("overlap must lie in [0, 1)")
        raw = self.window * (1.0 - self.overlap)
        if abs(raw - round(raw)) > _STRIDE_TOL or round(raw) < 1:
            raise NonIntegerStride(
                f"window {self.window} with overlap {self.overlap} gives "
                f"stride {raw!r}; must be a positive integer"
            )

    @property
    def stride(self) -> int:
        return int(round(self.window * (1.0 - self.overlap)))


@dataclass(frozen=True)
class Patch:
    """One window-sized crop plus where it came from in the parent image."""

    origin_x: int
    origin_y: int
    pixels: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class PatchGrid:
    """Placement lattice produced by one tiling pass.

    ``origins`` is row-major: all columns of row 0, then row 1, and so on.
    """

    cols: int
    rows: int
    window: int
    stride: int
    origins: Tuple[Tuple[int, int], ...]


def grid_count(dim: int, window: int, stride: int, include_tail: bool = False) -> int:
    """Number of window placements along one axis of length ``dim``."""
    if window > dim:
        raise WindowExceedsDim(f"window {window} exceeds dimension {dim}")
    if stride < 1:
        raise NonIntegerStride(f"stride must be >= 1, got {stride}")
    n = (dim - window) // stride + 1
    if include_tail and (dim - window) % stride != 0:
        n += 1
    return n


def _axis_origins(dim: int, window: int, stride: int, include_tail: bool) -> List[int]:
    if window > dim:
        raise WindowExceedsDim(f"window {window} exceeds dimension {dim}")
    origins = list(range(0, dim - window + 1, stride))
    tail = dim - window
    if include_tail and tail not in origins:
        origins.append(tail)
    return origins


def extract_patches(
    image: np.ndarray, spec: TileSpec
) -> Tuple[PatchGrid, List[Patch]]:
    """Cut an image into window-sized patches on the spec's lattice.

    Patches are bit-exact copies of the source regions, ordered row-major.
    Images smaller than the window are rejected; pre-padding is the
    caller's job because implicit padding would distort tissue morphology.
    """
    arr = validate_image(image)
    h, w = arr.shape[:2]
    if w < spec.window or h < spec.window:
        raise ImageSmallerThanWindow(
            f"image {w}x{h} cannot hold a {spec.window}px window"
        )
    xs = _axis_origins(w, spec.window, spec.stride, spec.include_tail)
    ys = _axis_origins(h, spec.window, spec.stride, spec.include_tail)

    origins = []
    patches = []
    for y in ys:
        for x in xs:
            origins.append((x, y))
            patches.append(
                Patch(origin_x=x, origin_y=y,
                      pixels=arr[y : y + spec.window, x : x + spec.window].copy())
            )
    grid = PatchGrid(
        cols=len(xs),
        rows=len(ys),
        window=spec.window,
        stride=spec.stride,
        origins=tuple(origins),
    )
    return grid, patches


def write_patches(
    grid: PatchGrid,
    patches: List[Patch],
    out_dir: Union[str, Path],
    stem: str,
) -> List[Path]:
    """Write patches as ``<stem>_r{row}_c{col}.png`` plus a grid sidecar.

    The sidecar ``<stem>_grid.json`` records {cols, rows, window, stride,
    origins} so a tiling pass can be audited without the source image.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for i, patch in enumerate(patches):
        row, col = divmod(i, grid.cols)
        path = out / f"{stem}_r{row}_c{col}.png"
        save_png(patch.pixels, path)
        written.append(path)
    sidecar = out / f"{stem}_grid.json"
    sidecar.write_text(
        json.dumps(
            {
                "cols": grid.cols,
                "rows": grid.rows,
                "window": grid.window,
                "stride": grid.stride,
                "origins": [list(o) for o in grid.origins],
            },
            indent=2,
        )
    )
    written.append(sidecar)
    return written
