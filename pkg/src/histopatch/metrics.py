"""Confusion matrix and per-class precision/recall/F1.

Rows are true classes, columns predicted. For class c: TP = M[c][c],
FP = column c minus TP, FN = row c minus TP. Divisions by zero yield 0 and
the class is flagged as degenerate rather than dropped, so reports stay
total.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import EmptyInput, LengthMismatch
from .labels import LABEL_NAMES, NUM_CLASSES


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int]) -> np.ndarray:
    """Count (true, predicted) pairs into a 4x4 int matrix."""
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true vs {len(y_pred)} predicted labels")
    if len(y_true) == 0:
        raise EmptyInput("no samples to evaluate")
    cm = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        cm[int(t), int(p)] += 1
    return cm


@dataclass(frozen=True)
class ClassMetrics:
    """Per-class precision/recall/F1 plus macro averages and accuracy."""

    precision: Tuple[float, ...]
    recall: Tuple[float, ...]
    f1: Tuple[float, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    degenerate: Tuple[str, ...] = ()   # classes where a zero division was forced to 0


def class_metrics(cm: np.ndarray) -> ClassMetrics:
    """Precision, recall, and F1 per class from a confusion matrix."""
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total < 1:
        raise EmptyInput("confusion matrix is empty")

    tp = np.diag(cm).astype(np.float64)
    col = cm.sum(axis=0).astype(np.float64)
    row = cm.sum(axis=1).astype(np.float64)

    degenerate = []
    precision, recall, f1 = [], [], []
    for c in range(NUM_CLASSES):
        p = tp[c] / col[c] if col[c] > 0 else 0.0
        r = tp[c] / row[c] if row[c] > 0 else 0.0
        if col[c] == 0 or row[c] == 0 or p + r == 0:
            degenerate.append(LABEL_NAMES[c])
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(f)

    return ClassMetrics(
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        macro_precision=float(np.mean(precision)),
        macro_recall=float(np.mean(recall)),
        macro_f1=float(np.mean(f1)),
        accuracy=accuracy(cm),
        degenerate=tuple(degenerate),
    )


def normalize_rows(cm: np.ndarray) -> np.ndarray:
    """Scale each row to sum to 1; all-zero rows stay zero."""
    cm = np.asarray(cm, dtype=np.float64)
    sums = cm.sum(axis=1, keepdims=True)
    out = np.divide(cm, sums, out=np.zeros_like(cm), where=sums > 0)
    return out


def accuracy(cm: np.ndarray) -> float:
    """trace / total."""
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total < 1:
        raise EmptyInput("confusion matrix is empty")
    return float(np.trace(cm)) / total


def report_dict(cm: np.ndarray) -> dict:
    """Full-precision JSON-ready report: matrix, normalized, per-class, macro."""
    m = class_metrics(cm)
    return {
        "matrix": np.asarray(cm, dtype=np.int64).tolist(),
        "normalized": normalize_rows(cm).tolist(),
        "per_class": {
            name: {
                "precision": m.precision[i],
                "recall": m.recall[i],
                "f1": m.f1[i],
            }
            for i, name in enumerate(LABEL_NAMES)
        },
        "macro": {
            "precision": m.macro_precision,
            "recall": m.macro_recall,
            "f1": m.macro_f1,
        },
        "accuracy": m.accuracy,
        "degenerate": list(m.degenerate),
    }


def report_json(cm: np.ndarray) -> str:
    return json.dumps(report_dict(cm), indent=2)


def report_text(cm: np.ndarray) -> str:
    """Aligned per-class table (2-decimal display; JSON keeps full precision)."""
    m = class_metrics(cm)
    lines = [f"{'':<10}{'Precision':>10}{'Recall':>10}{'F1-score':>10}"]
    for i, name in enumerate(LABEL_NAMES):
        lines.append(
            f"{name:<10}{m.precision[i]:>10.2f}{m.recall[i]:>10.2f}{m.f1[i]:>10.2f}"
        )
    lines.append(f"{'macro':<10}{m.macro_precision:>10.2f}{m.macro_recall:>10.2f}{m.macro_f1:>10.2f}")
    lines.append(f"accuracy  {m.accuracy:.4f}")
    if m.degenerate:
        lines.append("degenerate classes (zero division forced to 0): " + ", ".join(m.degenerate))
    return "\n".join(lines)
