"""Layer library with forward passes and analytic backward passes.

Tensors are NCHW float32; scalar reductions (losses, pooled means,
softmax normalizers) accumulate in float64 before casting back, which
keeps finite-difference gradient checks stable at 32-bit storage.
Convolutions use symmetric zero padding of (kernel - 1) // 2 per side
("same" for odd kernels), so a stride-2 layer maps H to ceil(H / 2).
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatch

BN_EPS = 1e-5
BN_MOMENTUM = 0.99  # running = momentum * running + (1 - momentum) * batch


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos].astype(np.float64)))
    ex = np.exp(x[~pos].astype(np.float64))
    out[~pos] = ex / (1.0 + ex)
    return out.astype(x.dtype)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, normalized in float64; rows sum to 1 within 1e-5."""
    z = logits.astype(np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    probs = e / e.sum(axis=1, keepdims=True)
    return probs.astype(logits.dtype)


def cross_entropy_with_grad(
    logits: np.ndarray, labels: np.ndarray
) -> Tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    n = logits.shape[0]
    z = logits.astype(np.float64)
    z = z - z.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = float(-log_probs[np.arange(n), labels].sum() / n)
    probs = np.exp(log_probs)
    probs[np.arange(n), labels] -= 1.0
    return loss, (probs / n).astype(logits.dtype)


def _he_uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer:
    """Base class: forward caches what backward needs; params are named."""

    name: str = ""

    def params(self) -> Dict[str, np.ndarray]:
        return {}

    def grads(self) -> Dict[str, np.ndarray]:
        return {}

    def buffers(self) -> Dict[str, np.ndarray]:
        """Non-trained tensors that still belong in the weight file."""
        return {}

    def tensors(self) -> Dict[str, np.ndarray]:
        out = dict(self.params())
        out.update(self.buffers())
        return out

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _pad_same(x: np.ndarray, k: int) -> Tuple[np.ndarray, int]:
    p = (k - 1) // 2
    if p == 0:
        return x, 0
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))), p


def _windows(x_padded: np.ndarray, k: int, stride: int) -> np.ndarray:
    # (N, C, OH, OW, k, k) view over the padded input
    win = sliding_window_view(x_padded, (k, k), axis=(2, 3))
    return win[:, :, ::stride, ::stride]


class Conv2d(Layer):
    def __init__(self, name: str, in_ch: int, out_ch: int, kernel: int,
                 stride: int = 1, bias: bool = True,
                 rng: Optional[np.random.Generator] = None,
                 dtype=np.float32):
        if kernel % 2 != 1:
            raise ValueError("odd kernels only")
        rng = rng or np.random.default_rng(0)
        self.name = name
        self.in_ch, self.out_ch = in_ch, out_ch
        self.kernel, self.stride = kernel, stride
        self.w = _he_uniform(rng, (out_ch, in_ch, kernel, kernel),
                             in_ch * kernel * kernel, dtype)
        self.b = np.zeros(out_ch, dtype=dtype) if bias else None
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b) if bias else None
        self._cache = None

    def params(self):
        out = {f"{self.name}.w": self.w}
        if self.b is not None:
            out[f"{self.name}.b"] = self.b
        return out

    def grads(self):
        out = {f"{self.name}.w": self.dw}
        if self.b is not None:
            out[f"{self.name}.b"] = self.db
        return out

    def forward(self, x, training=False):
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ShapeMismatch(
                f"{self.name}: expected (N, {self.in_ch}, H, W), got {x.shape}"
            )
        xp, p = _pad_same(x, self.kernel)
        win = _windows(xp, self.kernel, self.stride)
        out = np.einsum("nchwkl,ockl->nohw", win, self.w.astype(x.dtype))
        if self.b is not None:
            out += self.b.astype(x.dtype)[None, :, None, None]
        self._cache = (x.shape, xp, p, win)
        return out

    def backward(self, grad):
        x_shape, xp, p, win = self._cache
        self.dw = np.einsum("nohw,nchwkl->ockl", grad, win).astype(self.w.dtype)
        if self.b is not None:
            self.db = grad.sum(axis=(0, 2, 3)).astype(self.b.dtype)
        n, _, oh, ow = grad.shape
        s, k = self.stride, self.kernel
        dxp = np.zeros_like(xp)
        for i in range(k):
            for j in range(k):
                dxp[:, :, i : i + s * oh : s, j : j + s * ow : s] += np.einsum(
                    "nohw,oc->nchw", grad, self.w[:, :, i, j].astype(grad.dtype)
                )
        h, w = x_shape[2], x_shape[3]
        return dxp[:, :, p : p + h, p : p + w]


class DepthwiseConv2d(Layer):
    def __init__(self, name: str, channels: int, kernel: int, stride: int = 1,
                 bias: bool = True, rng: Optional[np.random.Generator] = None,
                 dtype=np.float32):
        if kernel % 2 != 1:
            raise ValueError("odd kernels only")
        rng = rng or np.random.default_rng(0)
        self.name = name
        self.channels, self.kernel, self.stride = channels, kernel, stride
        self.w = _he_uniform(rng, (channels, kernel, kernel), kernel * kernel, dtype)
        self.b = np.zeros(channels, dtype=dtype) if bias else None
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b) if bias else None
        self._cache = None

    def params(self):
        out = {f"{self.name}.w": self.w}
        if self.b is not None:
            out[f"{self.name}.b"] = self.b
        return out

    def grads(self):
        out = {f"{self.name}.w": self.dw}
        if self.b is not None:
            out[f"{self.name}.b"] = self.db
        return out

    def forward(self, x, training=False):
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ShapeMismatch(
                f"{self.name}: expected (N, {self.channels}, H, W), got {x.shape}"
            )
        xp, p = _pad_same(x, self.kernel)
        win = _windows(xp, self.kernel, self.stride)
        out = np.einsum("nchwkl,ckl->nchw", win, self.w.astype(x.dtype))
        if self.b is not None:
            out += self.b.astype(x.dtype)[None, :, None, None]
        self._cache = (x.shape, xp, p, win)
        return out

    def backward(self, grad):
        x_shape, xp, p, win = self._cache
        self.dw = np.einsum("nchw,nchwkl->ckl", grad, win).astype(self.w.dtype)
        if self.b is not None:
            self.db = grad.sum(axis=(0, 2, 3)).astype(self.b.dtype)
        _, _, oh, ow = grad.shape
        s, k = self.stride, self.kernel
        dxp = np.zeros_like(xp)
        for i in range(k):
            for j in range(k):
                dxp[:, :, i : i + s * oh : s, j : j + s * ow : s] += (
                    grad * self.w[:, i, j].astype(grad.dtype)[None, :, None, None]
                )
        h, w = x_shape[2], x_shape[3]
        return dxp[:, :, p : p + h, p : p + w]


class BatchNorm2d(Layer):
    """Inference-time affine transform over stored running statistics.

    In training mode the batch statistics are used and folded into the
    running estimates with momentum 0.99; eval mode treats the running
    stats as constants, which is what the inference pipeline needs.
    """

    def __init__(self, name: str, channels: int, dtype=np.float32):
        self.name = name
        self.channels = channels
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.dgamma = np.zeros_like(self.gamma)
        self.dbeta = np.zeros_like(self.beta)
        self._cache = None

    def params(self):
        return {f"{self.name}.gamma": self.gamma, f"{self.name}.beta": self.beta}

    def grads(self):
        return {f"{self.name}.gamma": self.dgamma, f"{self.name}.beta": self.dbeta}

    def buffers(self):
        return {
            f"{self.name}.running_mean": self.running_mean,
            f"{self.name}.running_var": self.running_var,
        }

    def forward(self, x, training=False):
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ShapeMismatch(
                f"{self.name}: expected (N, {self.channels}, H, W), got {x.shape}"
            )
        if training:
            mean = x.mean(axis=(0, 2, 3), dtype=np.float64)
            var = (x.astype(np.float64) ** 2).mean(axis=(0, 2, 3)) - mean**2
            var = np.maximum(var, 0.0)
            self.running_mean = (
                BN_MOMENTUM * self.running_mean + (1 - BN_MOMENTUM) * mean
            ).astype(self.running_mean.dtype)
            self.running_var = (
                BN_MOMENTUM * self.running_var + (1 - BN_MOMENTUM) * var
            ).astype(self.running_var.dtype)
        else:
            mean = self.running_mean.astype(np.float64)
            var = self.running_var.astype(np.float64)
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (x - mean.astype(x.dtype)[None, :, None, None]) * inv_std.astype(
            x.dtype
        )[None, :, None, None]
        out = self.gamma.astype(x.dtype)[None, :, None, None] * xhat
        out += self.beta.astype(x.dtype)[None, :, None, None]
        self._cache = (x, xhat, inv_std, training)
        return out

    def backward(self, grad):
        x, xhat, inv_std, training = self._cache
        self.dgamma = (grad * xhat).sum(axis=(0, 2, 3)).astype(self.gamma.dtype)
        self.dbeta = grad.sum(axis=(0, 2, 3)).astype(self.beta.dtype)
        g = self.gamma.astype(grad.dtype)[None, :, None, None]
        inv = inv_std.astype(grad.dtype)[None, :, None, None]
        if not training:
            return grad * g * inv
        m = x.shape[0] * x.shape[2] * x.shape[3]
        dxhat = grad * g
        sum_dxhat = dxhat.sum(axis=(0, 2, 3), keepdims=True)
        sum_dxhat_xhat = (dxhat * xhat).sum(axis=(0, 2, 3), keepdims=True)
        return inv / m * (m * dxhat - sum_dxhat - xhat * sum_dxhat_xhat)


class Swish(Layer):
    """x * sigmoid(x); the activation used throughout the model family."""

    def __init__(self, name: str = "swish"):
        self.name = name
        self._cache = None

    def forward(self, x, training=False):
        s = sigmoid(x)
        self._cache = (x, s)
        return x * s

    def backward(self, grad):
        x, s = self._cache
        return grad * (s + x * s * (1.0 - s))


class GlobalAvgPool(Layer):
    """(N, C, H, W) -> (N, C), averaging in float64."""

    def __init__(self, name: str = "gap"):
        self.name = name
        self._cache = None

    def forward(self, x, training=False):
        self._cache = x.shape
        return x.mean(axis=(2, 3), dtype=np.float64).astype(x.dtype)

    def backward(self, grad):
        n, c, h, w = self._cache
        return np.broadcast_to(
            grad[:, :, None, None] / (h * w), (n, c, h, w)
        ).astype(grad.dtype).copy()


class Dense(Layer):
    def __init__(self, name: str, in_features: int, out_features: int,
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        rng = rng or np.random.default_rng(0)
        self.name = name
        self.in_features, self.out_features = in_features, out_features
        self.w = _he_uniform(rng, (out_features, in_features), in_features, dtype)
        self.b = np.zeros(out_features, dtype=dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def params(self):
        return {f"{self.name}.w": self.w, f"{self.name}.b": self.b}

    def grads(self):
        return {f"{self.name}.w": self.dw, f"{self.name}.b": self.db}

    def forward(self, x, training=False):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeMismatch(
                f"{self.name}: expected (N, {self.in_features}), got {x.shape}"
            )
        self._cache = x
        return x @ self.w.T.astype(x.dtype) + self.b.astype(x.dtype)

    def backward(self, grad):
        x = self._cache
        self.dw = (grad.T @ x).astype(self.w.dtype)
        self.db = grad.sum(axis=0).astype(self.b.dtype)
        return grad @ self.w.astype(grad.dtype)


class SqueezeExcite(Layer):
    """Channel attention: pooled means -> reduce -> swish -> expand -> sigmoid gate.

    With zero expand weights the gate is sigmoid(0) = 0.5 for every channel.
    """

    def __init__(self, name: str, channels: int, reduced: int,
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        rng = rng or np.random.default_rng(0)
        self.name = name
        self.channels, self.reduced = channels, reduced
        self.w1 = _he_uniform(rng, (reduced, channels), channels, dtype)
        self.b1 = np.zeros(reduced, dtype=dtype)
        self.w2 = _he_uniform(rng, (channels, reduced), reduced, dtype)
        self.b2 = np.zeros(channels, dtype=dtype)
        self.dw1 = np.zeros_like(self.w1)
        self.db1 = np.zeros_like(self.b1)
        self.dw2 = np.zeros_like(self.w2)
        self.db2 = np.zeros_like(self.b2)
        self._cache = None

    def params(self):
        return {
            f"{self.name}.w1": self.w1, f"{self.name}.b1": self.b1,
            f"{self.name}.w2": self.w2, f"{self.name}.b2": self.b2,
        }

    def grads(self):
        return {
            f"{self.name}.w1": self.dw1, f"{self.name}.b1": self.db1,
            f"{self.name}.w2": self.dw2, f"{self.name}.b2": self.db2,
        }

    def forward(self, x, training=False):
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ShapeMismatch(
                f"{self.name}: expected (N, {self.channels}, H, W), got {x.shape}"
            )
        pooled = x.mean(axis=(2, 3), dtype=np.float64).astype(x.dtype)
        z1 = pooled @ self.w1.T.astype(x.dtype) + self.b1.astype(x.dtype)
        s1 = sigmoid(z1)
        a1 = z1 * s1
        z2 = a1 @ self.w2.T.astype(x.dtype) + self.b2.astype(x.dtype)
        gate = sigmoid(z2)
        self._cache = (x, pooled, z1, s1, a1, gate)
        return x * gate[:, :, None, None]

    def backward(self, grad):
        x, pooled, z1, s1, a1, gate = self._cache
        dgate = (grad * x).sum(axis=(2, 3))
        dx = grad * gate[:, :, None, None]

        dz2 = dgate * gate * (1.0 - gate)
        self.dw2 = (dz2.T @ a1).astype(self.w2.dtype)
        self.db2 = dz2.sum(axis=0).astype(self.b2.dtype)
        da1 = dz2 @ self.w2.astype(grad.dtype)

        dz1 = da1 * (s1 + z1 * s1 * (1.0 - s1))
        self.dw1 = (dz1.T @ pooled).astype(self.w1.dtype)
        self.db1 = dz1.sum(axis=0).astype(self.b1.dtype)
        dpooled = dz1 @ self.w1.astype(grad.dtype)

        h, w = x.shape[2], x.shape[3]
        dx = dx + dpooled[:, :, None, None] / (h * w)
        return dx
