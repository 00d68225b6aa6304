"""Compound scaling and architecture generation for the 7-block model family.

Depth, width, and input resolution are scaled jointly by alpha**phi,
beta**phi, gamma**phi. The coefficient defaults (1.2, 1.1, 1.15) and the
base block table are configuration shipped with the package, chosen so
alpha * beta**2 * gamma**2 stays close to the compute-doubling target of 2.
Variants B0..B3 correspond to phi = 0..3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Tuple

DEFAULT_ALPHA = 1.2
DEFAULT_BETA = 1.1
DEFAULT_GAMMA = 1.15
COMPUTE_TARGET = 2.0
FILTER_DIVISOR = 8

# Sub-block kinds; placement rules are fixed by the architecture family.
SUB_BLOCK_PLAIN = 1    # no expansion; opens the first block only
SUB_BLOCK_REDUCE = 2   # expanded, may stride; opens blocks 2..7
SUB_BLOCK_REPEAT = 3   # expanded, stride 1, residual; all later positions


@dataclass(frozen=True)
class ScalingCoefficients:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    phi: float = 0.0

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 1.0:
            raise ValueError("alpha, beta, gamma must each be >= 1")
        if self.phi < 0:
            raise ValueError("phi must be >= 0")


class Multipliers(NamedTuple):
    depth_mult: float
    width_mult: float
    res_mult: float


class ConstraintCheck(NamedTuple):
    value: float
    passed: bool
    target: float
    tol: float


@dataclass(frozen=True)
class BlockConfig:
    repeats: int
    filters_in: int
    filters_out: int
    kernel: int
    stride: int
    expand_ratio: int
    se_ratio: float = 0.25

    def __post_init__(self) -> None:
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if min(self.filters_in, self.filters_out) < 1:
            raise ValueError("filter counts must be positive")
        if self.stride not in (1, 2):
            raise ValueError("stride must be 1 or 2")


def build_sub_block_plan(blocks: Tuple[BlockConfig, ...]) -> Tuple[Tuple[int, ...], ...]:
    """Assign a sub-block kind to every repeat position.

    Placement rules: the first block opens with the plain kind, every other
    block opens with the reducing kind, and all remaining positions use the
    residual repeat kind.
    """
    plan = []
    for i, block in enumerate(blocks):
        first = SUB_BLOCK_PLAIN if i == 0 else SUB_BLOCK_REDUCE
        plan.append(tuple([first] + [SUB_BLOCK_REPEAT] * (block.repeats - 1)))
    return tuple(plan)


@dataclass(frozen=True)
class ArchSpec:
    """Full description of one generated network, always exactly 7 blocks."""

    stem_filters: int
    blocks: Tuple[BlockConfig, ...]
    head_filters: int
    input_resolution: int
    sub_block_plan: Tuple[Tuple[int, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        if len(self.blocks) != 7:
            raise ValueError(f"expected exactly 7 blocks, got {len(self.blocks)}")
        if not self.sub_block_plan:
            object.__setattr__(self, "sub_block_plan", build_sub_block_plan(self.blocks))
        elif self.sub_block_plan != build_sub_block_plan(self.blocks):
            raise ValueError("sub_block_plan violates the placement rules")

    def to_dict(self) -> dict:
        return {
            "stem_filters": self.stem_filters,
            "head_filters": self.head_filters,
            "input_resolution": self.input_resolution,
            "blocks": [
                {
                    "repeats": b.repeats,
                    "filters_in": b.filters_in,
                    "filters_out": b.filters_out,
                    "kernel": b.kernel,
                    "stride": b.stride,
                    "expand_ratio": b.expand_ratio,
                    "se_ratio": b.se_ratio,
                }
                for b in self.blocks
            ],
            "sub_block_plan": [list(p) for p in self.sub_block_plan],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArchSpec":
        blocks = tuple(BlockConfig(**b) for b in d["blocks"])
        return cls(
            stem_filters=d["stem_filters"],
            blocks=blocks,
            head_filters=d["head_filters"],
            input_resolution=d["input_resolution"],
        )


# Base table for the phi = 0 variant; a configuration default of this
# package, not a tuned result.
BASE_BLOCKS: Tuple[BlockConfig, ...] = (
    BlockConfig(repeats=1, filters_in=32, filters_out=16, kernel=3, stride=1, expand_ratio=1),
    BlockConfig(repeats=2, filters_in=16, filters_out=24, kernel=3, stride=2, expand_ratio=6),
    BlockConfig(repeats=2, filters_in=24, filters_out=40, kernel=5, stride=2, expand_ratio=6),
    BlockConfig(repeats=3, filters_in=40, filters_out=80, kernel=3, stride=2, expand_ratio=6),
    BlockConfig(repeats=3, filters_in=80, filters_out=112, kernel=5, stride=1, expand_ratio=6),
    BlockConfig(repeats=4, filters_in=112, filters_out=192, kernel=5, stride=2, expand_ratio=6),
    BlockConfig(repeats=1, filters_in=192, filters_out=320, kernel=3, stride=1, expand_ratio=6),
)

BASE_SPEC = ArchSpec(
    stem_filters=32,
    blocks=BASE_BLOCKS,
    head_filters=1280,
    input_resolution=224,
)


def compound_scale(c: ScalingCoefficients) -> Multipliers:
    """(alpha**phi, beta**phi, gamma**phi) as depth/width/resolution multipliers."""
    return Multipliers(
        depth_mult=c.alpha ** c.phi,
        width_mult=c.beta ** c.phi,
        res_mult=c.gamma ** c.phi,
    )


def check_compute_constraint(c: ScalingCoefficients, tol: float = 0.1) -> ConstraintCheck:
    """Report alpha * beta**2 * gamma**2 against the compute-doubling target 2."""
    value = c.alpha * c.beta**2 * c.gamma**2
    return ConstraintCheck(
        value=value,
        passed=abs(value - COMPUTE_TARGET) <= tol,
        target=COMPUTE_TARGET,
        tol=tol,
    )


def round_filters(n: int, width_mult: float, divisor: int = FILTER_DIVISOR) -> int:
    """Scale a filter count and snap to the divisor, never shrinking by >10%."""
    if n < 1 or divisor < 1:
        raise ValueError("filter count and divisor must be positive")
    scaled = n * width_mult
    new = max(divisor, int(scaled + divisor / 2) // divisor * divisor)
    if new < 0.9 * scaled:
        new += divisor
    return new


def round_repeats(n: int, depth_mult: float) -> int:
    """Scale a repeat count, rounding up; never below 1."""
    if n < 1:
        raise ValueError("repeats must be >= 1")
    return max(1, math.ceil(n * depth_mult))


def _round_even(value: float) -> int:
    return int(value / 2.0 + 0.5) * 2


def generate_architecture(
    base: ArchSpec,
    c: ScalingCoefficients,
    divisor: int = FILTER_DIVISOR,
) -> ArchSpec:
    """Produce the scaled variant of ``base`` for the given coefficients.

    Filter counts go through :func:`round_filters`, repeats through
    :func:`round_repeats`, and the input resolution is scaled and rounded
    to the nearest even integer so stride-2 shape arithmetic stays clean.
    """
    mult = compound_scale(c)
    blocks = tuple(
        replace(
            b,
            repeats=round_repeats(b.repeats, mult.depth_mult),
            filters_in=round_filters(b.filters_in, mult.width_mult, divisor),
            filters_out=round_filters(b.filters_out, mult.width_mult, divisor),
        )
        for b in base.blocks
    )
    return ArchSpec(
        stem_filters=round_filters(base.stem_filters, mult.width_mult, divisor),
        blocks=blocks,
        head_filters=round_filters(base.head_filters, mult.width_mult, divisor),
        input_resolution=_round_even(base.input_resolution * mult.res_mult),
    )


def variant_spec(phi: int, base: ArchSpec = BASE_SPEC, **coeffs) -> ArchSpec:
    """Convenience constructor for the B0..B3 family (phi = 0..3)."""
    c = ScalingCoefficients(phi=float(phi), **coeffs)
    return generate_architecture(base, c)


def layer_inventory(spec: ArchSpec) -> dict:
    """Count the layers the engine will realize for ``spec``.

    Informational only; the counting convention is this package's own
    (each conv, norm, activation, pool, gate, and dense counts as one).
    """
    counts = {"conv": 1, "norm": 1, "activation": 1, "se": 0, "pool": 0, "dense": 0}
    for block_plan in spec.sub_block_plan:
        for kind in block_plan:
            expand = 0 if kind == SUB_BLOCK_PLAIN else 1
            counts["conv"] += expand + 2          # expand? + depthwise + project
            counts["norm"] += expand + 2
            counts["activation"] += expand + 1    # project stage has no activation
            counts["se"] += 1
    counts["conv"] += 1        # head conv
    counts["norm"] += 1
    counts["activation"] += 1
    counts["pool"] += 1        # global average pool
    counts["dense"] += 1       # classifier
    counts["total"] = sum(v for k, v in counts.items() if k != "total")
    return counts
