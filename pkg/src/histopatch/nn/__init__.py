"""Minimal tensor/NN engine: layers with analytic gradients, model
assembly from generated architecture specs, SGD training for desk-scale
nets, and a bit-exact on-disk weight container."""

from .layers import (
    BatchNorm2d,
    Conv2d,
    Dense,
    DepthwiseConv2d,
    GlobalAvgPool,
    SqueezeExcite,
    Swish,
    cross_entropy_with_grad,
    sigmoid,
    softmax,
)
from .model import Model, build_compact_cnn, build_model, images_to_batch, load_model, save_model
from .train import TrainerConfig, fit, step_lr
from .weights import load_tensors, save_tensors

__all__ = [
    "BatchNorm2d", "Conv2d", "Dense", "DepthwiseConv2d", "GlobalAvgPool",
    "SqueezeExcite", "Swish", "cross_entropy_with_grad", "sigmoid", "softmax",
    "Model", "build_compact_cnn", "build_model", "images_to_batch",
    "load_model", "save_model",
    "TrainerConfig", "fit", "step_lr",
    "load_tensors", "save_tensors",
]
