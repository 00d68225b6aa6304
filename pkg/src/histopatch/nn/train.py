"""SGD-with-momentum training loop with a stepped learning-rate schedule.

The schedule halves the rate every ``step_size`` epochs by default
(lr = lr0 * gamma ** floor(epoch / step_size)). Training here targets
desk-scale nets built from the layer library; the full-size variants are
inference-only in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..augment import make_rng
from ..errors import NonFiniteLoss
from .layers import cross_entropy_with_grad, softmax
from .model import Model


@dataclass(frozen=True)
class TrainerConfig:
    lr0: float
    momentum: float = 0.9
    step_size: int = 30
    gamma: float = 0.5
    epochs: int = 10
    batch_size: int = 32

    def __post_init__(self) -> None:
        if self.lr0 < 0:
            raise ValueError("lr0 must be >= 0")
        if not (0 < self.gamma <= 1):
            raise ValueError("gamma must lie in (0, 1]")
        if self.step_size < 1:
            raise ValueError("step_size must be >= 1")


def step_lr(epoch: int, cfg: TrainerConfig) -> float:
    """lr0 * gamma ** floor(epoch / step_size)."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return cfg.lr0 * cfg.gamma ** (epoch // cfg.step_size)


class SGD:
    """Classic momentum: v = mu * v - lr * g; w += v."""

    def __init__(self, model: Model, momentum: float):
        self.model = model
        self.momentum = momentum
        self.velocity = {
            name: np.zeros_like(p) for name, p in model.named_params().items()
        }

    def step(self, lr: float) -> None:
        grads = self.model.named_grads()
        for name, param in self.model.named_params().items():
            v = self.velocity[name]
            v *= self.momentum
            v -= lr * grads[name]
            param += v


def evaluate(model: Model, x: np.ndarray, y: np.ndarray,
             batch_size: int = 64) -> Tuple[float, float]:
    """Mean cross-entropy and accuracy over a labeled set (eval mode)."""
    losses: List[float] = []
    hits = 0
    for start in range(0, len(x), batch_size):
        xb = x[start : start + batch_size]
        yb = y[start : start + batch_size]
        logits = model.forward(xb, training=False)
        loss, _ = cross_entropy_with_grad(logits, yb)
        losses.append(loss * len(xb))
        hits += int((softmax(logits).argmax(axis=1) == yb).sum())
    return float(np.sum(losses) / len(x)), hits / len(x)


def fit(
    model: Model,
    train: Tuple[np.ndarray, np.ndarray],
    valid: Optional[Tuple[np.ndarray, np.ndarray]],
    cfg: TrainerConfig,
    seed: int = 0,
) -> List[Dict[str, float]]:
    """Train with SGD + momentum; returns per-epoch history records.

    Batching order is drawn from the seeded stream, so a fixed
    (model, data, config, seed) replays the identical trajectory.
    Raises NonFiniteLoss with the failing epoch/batch if the loss blows up.
    """
    x_train, y_train = train
    optimizer = SGD(model, cfg.momentum)
    rng = make_rng(seed)
    history: List[Dict[str, float]] = []
    for epoch in range(cfg.epochs):
        lr = step_lr(epoch, cfg)
        order = rng.permutation(len(x_train))
        epoch_loss = 0.0
        hits = 0
        for b, start in enumerate(range(0, len(order), cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            xb = x_train[idx]
            yb = y_train[idx]
            logits = model.forward(xb, training=True)
            loss, dlogits = cross_entropy_with_grad(logits, yb)
            if not math.isfinite(loss):
                raise NonFiniteLoss(
                    f"loss became {loss} at epoch {epoch}, batch {b} (lr={lr:g})"
                )
            model.backward(dlogits)
            optimizer.step(lr)
            epoch_loss += loss * len(idx)
            hits += int((logits.argmax(axis=1) == yb).sum())
        record = {
            "epoch": float(epoch),
            "lr": lr,
            "train_loss": epoch_loss / len(order),
            "train_acc": hits / len(order),
        }
        if valid is not None:
            val_loss, val_acc = evaluate(model, valid[0], valid[1], cfg.batch_size)
            record["val_loss"] = val_loss
            record["val_acc"] = val_acc
        history.append(record)
    return history
