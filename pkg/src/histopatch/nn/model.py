"""Model assembly: realize a generated architecture as a layer graph.

A model is an ordered stack of layers plus metadata (input resolution,
class count, identity). Blocks are built from MBConv-style sub-blocks
according to the architecture's sub-block plan:

  kind 1  no expansion: depthwise conv -> norm -> swish -> SE -> project
  kind 2  expansion first, may stride, changes channel count
  kind 3  like kind 2 but stride 1, equal channels, residual add

Models are immutable after build/load as far as inference is concerned;
only the trainer mutates weights.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..augment import make_rng
from ..errors import NameCollision, ShapeMismatch
from ..scaling import SUB_BLOCK_PLAIN, SUB_BLOCK_REPEAT, ArchSpec
from .layers import (
    BatchNorm2d,
    Conv2d,
    Dense,
    DepthwiseConv2d,
    GlobalAvgPool,
    Layer,
    SqueezeExcite,
    Swish,
    softmax,
)
from .weights import load_tensors, save_tensors


class Sequential(Layer):
    def __init__(self, name: str, children: Sequence[Layer]):
        self.name = name
        self.children = list(children)

    def params(self):
        return _merge_named(self.children, "params")

    def grads(self):
        return _merge_named(self.children, "grads")

    def buffers(self):
        return _merge_named(self.children, "buffers")

    def forward(self, x, training=False):
        for child in self.children:
            x = child.forward(x, training=training)
        return x

    def backward(self, grad):
        for child in reversed(self.children):
            grad = child.backward(grad)
        return grad


class MBConvSubBlock(Layer):
    """One inverted-bottleneck unit; residual only for the repeat kind."""

    def __init__(self, name: str, kind: int, in_ch: int, out_ch: int,
                 kernel: int, stride: int, expand_ratio: int, se_ratio: float,
                 rng: np.random.Generator):
        self.name = name
        self.kind = kind
        self.residual = kind == SUB_BLOCK_REPEAT
        if self.residual and (in_ch != out_ch or stride != 1):
            raise ShapeMismatch(
                f"{name}: repeat sub-block needs equal channels and stride 1"
            )
        mid = in_ch if kind == SUB_BLOCK_PLAIN else in_ch * expand_ratio
        stages: List[Layer] = []
        if kind != SUB_BLOCK_PLAIN:
            stages += [
                Conv2d(f"{name}.expand", in_ch, mid, 1, 1, bias=False, rng=rng),
                BatchNorm2d(f"{name}.expand_bn", mid),
                Swish(),
            ]
        stages += [
            DepthwiseConv2d(f"{name}.dw", mid, kernel, stride, bias=False, rng=rng),
            BatchNorm2d(f"{name}.dw_bn", mid),
            Swish(),
            SqueezeExcite(f"{name}.se", mid,
                          reduced=max(1, int(round(in_ch * se_ratio))), rng=rng),
            Conv2d(f"{name}.project", mid, out_ch, 1, 1, bias=False, rng=rng),
            BatchNorm2d(f"{name}.project_bn", out_ch),
        ]
        self.body = Sequential(name, stages)

    def params(self):
        return self.body.params()

    def grads(self):
        return self.body.grads()

    def buffers(self):
        return self.body.buffers()

    def forward(self, x, training=False):
        out = self.body.forward(x, training=training)
        if self.residual:
            out = out + x
        return out

    def backward(self, grad):
        dx = self.body.backward(grad)
        if self.residual:
            dx = dx + grad
        return dx


def _merge_named(children: Sequence[Layer], getter: str) -> Dict[str, np.ndarray]:
    merged: Dict[str, np.ndarray] = {}
    for child in children:
        for key, value in getattr(child, getter)().items():
            if key in merged:
                raise NameCollision(f"duplicate tensor name {key!r}")
            merged[key] = value
    return merged


class Model:
    """Ordered layer stack ending in a linear classifier (softmax applied on top)."""

    def __init__(self, layers: Sequence[Layer], input_resolution: int,
                 num_classes: int, model_id: str, descriptor: dict):
        self.layers = list(layers)
        self.input_resolution = input_resolution
        self.num_classes = num_classes
        self.model_id = model_id
        self.descriptor = descriptor

    def named_params(self) -> Dict[str, np.ndarray]:
        return _merge_named(self.layers, "params")

    def named_grads(self) -> Dict[str, np.ndarray]:
        return _merge_named(self.layers, "grads")

    def named_tensors(self) -> Dict[str, np.ndarray]:
        return _merge_named(self.layers, "tensors")

    def parameter_count(self) -> int:
        return sum(int(np.prod(t.shape)) for t in self.named_params().values())

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, training=training)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def predict_probs(self, batch: np.ndarray) -> np.ndarray:
        """Class probabilities per row; rows sum to 1 within 1e-5."""
        if batch.ndim != 4 or batch.shape[1] != 3:
            raise ShapeMismatch(f"expected (N, 3, R, R) batch, got {batch.shape}")
        r = self.input_resolution
        if batch.shape[2] != r or batch.shape[3] != r:
            raise ShapeMismatch(
                f"model expects {r}x{r} input, got {batch.shape[2]}x{batch.shape[3]}"
            )
        return softmax(self.forward(batch.astype(np.float32), training=False))

    def load_state(self, tensors: Dict[str, np.ndarray]) -> None:
        """Assign stored tensors by name; shapes must match exactly."""
        own = self.named_tensors()
        missing = sorted(set(own) - set(tensors))
        extra = sorted(set(tensors) - set(own))
        if missing or extra:
            raise ShapeMismatch(
                f"weight names do not match model (missing {missing[:3]}, extra {extra[:3]})"
            )
        for name, target in own.items():
            src = tensors[name]
            if src.shape != target.shape:
                raise ShapeMismatch(
                    f"{name}: stored shape {src.shape} != model shape {target.shape}"
                )
            target[...] = src


def _stage(prefix: str, spec: ArchSpec, num_classes: int,
           rng: np.random.Generator) -> List[Layer]:
    layers: List[Layer] = [
        Conv2d(f"{prefix}stem.conv", 3, spec.stem_filters, 3, 2, bias=False, rng=rng),
        BatchNorm2d(f"{prefix}stem.bn", spec.stem_filters),
        Swish(),
    ]
    for b, (block, plan) in enumerate(zip(spec.blocks, spec.sub_block_plan), start=1):
        in_ch = block.filters_in
        for s, kind in enumerate(plan, start=1):
            first = s == 1
            layers.append(
                MBConvSubBlock(
                    f"{prefix}b{b}.s{s}",
                    kind=kind,
                    in_ch=in_ch,
                    out_ch=block.filters_out,
                    kernel=block.kernel,
                    stride=block.stride if first else 1,
                    expand_ratio=block.expand_ratio,
                    se_ratio=block.se_ratio,
                    rng=rng,
                )
            )
            in_ch = block.filters_out
    layers += [
        Conv2d(f"{prefix}head.conv", spec.blocks[-1].filters_out,
               spec.head_filters, 1, 1, bias=False, rng=rng),
        BatchNorm2d(f"{prefix}head.bn", spec.head_filters),
        Swish(),
        GlobalAvgPool(),
        Dense(f"{prefix}fc", spec.head_filters, num_classes, rng=rng),
    ]
    return layers


def build_model(spec: ArchSpec, num_classes: int, init_seed: int,
                input_resolution: Optional[int] = None,
                model_id: Optional[str] = None) -> Model:
    """Realize an architecture spec; weights drawn from the seeded stream.

    ``input_resolution`` overrides the spec's resolution for desk-scale
    work (the layer stack itself is resolution-independent).
    """
    if spec.stem_filters != spec.blocks[0].filters_in:
        raise ShapeMismatch("stem filters must match the first block's input")
    for prev, cur in zip(spec.blocks, spec.blocks[1:]):
        if prev.filters_out != cur.filters_in:
            raise ShapeMismatch(
                f"block chain broken: {prev.filters_out} -> {cur.filters_in}"
            )
    rng = make_rng(init_seed)
    resolution = input_resolution or spec.input_resolution
    descriptor = {
        "kind": "scaled",
        "arch": spec.to_dict(),
        "num_classes": num_classes,
        "input_resolution": resolution,
        "init_seed": init_seed,
        "padding": "same-zero-symmetric",
        "rng": "pcg64",
    }
    return Model(
        _stage("", spec, num_classes, rng),
        input_resolution=resolution,
        num_classes=num_classes,
        model_id=model_id or f"scaled-r{resolution}",
        descriptor=descriptor,
    )


def build_compact_cnn(num_classes: int, input_resolution: int, init_seed: int,
                      widths: Tuple[int, ...] = (8, 16),
                      model_id: Optional[str] = None) -> Model:
    """Small conv net from the same layer library, for desk-scale training."""
    rng = make_rng(init_seed)
    layers: List[Layer] = []
    in_ch = 3
    for i, width in enumerate(widths, start=1):
        layers += [
            Conv2d(f"c{i}.conv", in_ch, width, 3, 2, bias=False, rng=rng),
            BatchNorm2d(f"c{i}.bn", width),
            Swish(),
        ]
        in_ch = width
    layers += [GlobalAvgPool(), Dense("fc", in_ch, num_classes, rng=rng)]
    descriptor = {
        "kind": "compact",
        "widths": list(widths),
        "num_classes": num_classes,
        "input_resolution": input_resolution,
        "init_seed": init_seed,
        "padding": "same-zero-symmetric",
        "rng": "pcg64",
    }
    return Model(
        layers,
        input_resolution=input_resolution,
        num_classes=num_classes,
        model_id=model_id or f"compact-{'x'.join(map(str, widths))}",
        descriptor=descriptor,
    )


def _rebuild_from_descriptor(desc: dict) -> Model:
    if desc["kind"] == "compact":
        return build_compact_cnn(
            num_classes=desc["num_classes"],
            input_resolution=desc["input_resolution"],
            init_seed=desc["init_seed"],
            widths=tuple(desc["widths"]),
            model_id=desc.get("model_id"),
        )
    if desc["kind"] == "scaled":
        return build_model(
            ArchSpec.from_dict(desc["arch"]),
            num_classes=desc["num_classes"],
            init_seed=desc["init_seed"],
            input_resolution=desc["input_resolution"],
            model_id=desc.get("model_id"),
        )
    raise ValueError(f"unknown model kind {desc['kind']!r}")


def save_model(model: Model, prefix: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``<prefix>.json`` (descriptor) and ``<prefix>.effw`` (weights)."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    weights_path = prefix.with_suffix(".effw")
    save_tensors(model.named_tensors(), weights_path)
    desc = dict(model.descriptor)
    desc.update(
        {
            "format": "histopatch-model",
            "version": 1,
            "model_id": model.model_id,
            "weights_file": weights_path.name,
            "weights_sha256": hashlib.sha256(weights_path.read_bytes()).hexdigest(),
        }
    )
    json_path = prefix.with_suffix(".json")
    json_path.write_text(json.dumps(desc, indent=2))
    return json_path, weights_path


def load_model(descriptor_path: Union[str, Path]) -> Model:
    """Rebuild a model from its descriptor and load its weights."""
    path = Path(descriptor_path)
    desc = json.loads(path.read_text())
    if desc.get("format") != "histopatch-model":
        raise ValueError(f"{path} is not a model descriptor")
    model = _rebuild_from_descriptor(desc)
    model.model_id = desc.get("model_id", model.model_id)
    model.descriptor = desc
    model.load_state(load_tensors(path.parent / desc["weights_file"]))
    return model


def images_to_batch(images: Sequence[np.ndarray]) -> np.ndarray:
    """Stack HWC uint8 images into an (N, 3, H, W) float32 batch in [0, 1]."""
    batch = np.stack([img.astype(np.float32) / 255.0 for img in images])
    return np.ascontiguousarray(batch.transpose(0, 3, 1, 2))
