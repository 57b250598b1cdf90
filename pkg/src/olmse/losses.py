"""Per-sample losses and their gradients with respect to the raw network outputs.

Every loss here is written for a batch of logits of shape (n, K); the
single-sample functions are thin views over the batched kernels. Gradients are
per sample and unscaled: averaging over the batch is the trainer's job.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .labels import TargetTable, one_hot, outlying_labels


class LossKind(str, enum.Enum):
    CE = "ce"
    WCE = "wce"
    FOCAL = "focal"
    MSE = "mse"
    MSE_OL = "mse-ol"


@dataclass(frozen=True)
class LossGrad:
    value: float
    grad: np.ndarray


@dataclass(frozen=True)
class BatchLoss:
    values: np.ndarray  # (n,)
    grads: np.ndarray   # (n, K), d value_i / d logits_i

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def __getitem__(self, i) -> LossGrad:
        return LossGrad(float(self.values[i]), self.grads[i])


def _as_batch(logits) -> np.ndarray:
    a = np.asarray(logits, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] < 1:
        raise ValueError(f"logits must be (K,) or (n, K), got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("logits contain non-finite values")
    return a


def _check_classes(classes, n: int, k: int) -> np.ndarray:
    c = np.asarray(classes, dtype=np.int64).reshape(-1)
    if c.shape != (n,):
        raise ValueError(f"expected {n} class indices, got {c.shape[0]}")
    if c.size and (c.min() < 0 or c.max() >= k):
        raise ValueError(f"class index out of range [0, {k})")
    return c


def _log_softmax(a: np.ndarray) -> np.ndarray:
    shifted = a - a.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits) -> np.ndarray:
    """Softmax along the last axis, computed after subtracting the max."""
    single = np.ndim(logits) == 1
    a = _as_batch(logits)
    e = np.exp(a - a.max(axis=1, keepdims=True))
    y = e / e.sum(axis=1, keepdims=True)
    return y[0] if single else y


def _sample_weights(class_weights, classes: np.ndarray, k: int) -> np.ndarray:
    if class_weights is None:
        return np.ones(len(classes))
    w = np.asarray(class_weights, dtype=np.float64)
    if w.shape != (k,):
        raise ValueError(f"class_weights must have length {k}, got shape {w.shape}")
    return w[classes]


def ce_batch(logits, classes, class_weights=None) -> BatchLoss:
    """Softmax cross-entropy, -w log y_t, with gradient w (y - onehot(t))."""
    a = _as_batch(logits)
    n, k = a.shape
    c = _check_classes(classes, n, k)
    w = _sample_weights(class_weights, c, k)
    log_y = _log_softmax(a)
    rows = np.arange(n)
    values = -w * log_y[rows, c]
    grads = np.exp(log_y)
    grads[rows, c] -= 1.0
    grads *= w[:, None]
    return BatchLoss(values, grads)


def focal_batch(logits, classes, gamma: float = 2.0, class_weights=None) -> BatchLoss:
    """Focal loss -w (1 - y_t)^gamma log y_t; gamma = 0 is exactly ce_batch."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    a = _as_batch(logits)
    n, k = a.shape
    c = _check_classes(classes, n, k)
    w = _sample_weights(class_weights, c, k)
    log_y = _log_softmax(a)
    y = np.exp(log_y)
    rows = np.arange(n)
    log_pt = log_y[rows, c]
    pt = y[rows, c]
    q = -np.expm1(log_pt)  # 1 - y_t without cancellation
    modulator = q ** gamma
    values = -w * modulator * log_pt
    # d value / d y_t * y_t, then chained through d y_t / d a_j = y_t (delta_tj - y_j)
    if gamma == 0:
        scale = -modulator
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            pull = np.where(q > 0, gamma * pt * q ** (gamma - 1) * log_pt, 0.0)
        scale = pull - modulator
    grads = -y
    grads[rows, c] += 1.0
    grads *= (w * scale)[:, None]
    return BatchLoss(values, grads)


def mse_batch(logits, targets) -> BatchLoss:
    """Sum over classes of 0.5 (a_k - t_k)^2 on raw logits; gradient a - t."""
    a = _as_batch(logits)
    t = np.asarray(targets, dtype=np.float64)
    if t.ndim == 1:
        t = t[None, :]
    if t.shape != a.shape:
        raise ValueError(f"target shape {t.shape} does not match logits {a.shape}")
    diff = a - t
    return BatchLoss(0.5 * np.sum(diff * diff, axis=1), diff)


def ce_loss(logits, true_class: int, class_weights=None) -> LossGrad:
    return ce_batch(logits, [true_class], class_weights)[0]


def focal_loss(logits, true_class: int, gamma: float = 2.0, class_weights=None) -> LossGrad:
    return focal_batch(logits, [true_class], gamma, class_weights)[0]


def mse_loss(logits, target) -> LossGrad:
    return mse_batch(logits, target)[0]


def median_frequency_weights(class_counts: Sequence[int]) -> np.ndarray:
    """w_k = median(counts) / counts[k]."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0:
        raise ValueError("class_counts is empty")
    if np.any(counts < 1):
        raise ValueError(f"class counts must be >= 1, got {class_counts!r}")
    return np.median(counts) / counts


@dataclass(frozen=True)
class LossSpec:
    """A loss kind bound to whatever per-class data it needs."""

    kind: LossKind
    table: TargetTable | None = None
    class_weights: np.ndarray | None = None
    gamma: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.kind in (LossKind.MSE, LossKind.MSE_OL) and self.table is None:
            raise ValueError(f"loss {self.kind.value} needs a target table")
        if self.kind is LossKind.WCE and self.class_weights is None:
            raise ValueError("loss wce needs class weights")


def batch_loss(spec: LossSpec, logits, classes) -> BatchLoss:
    """Dispatch on the loss kind; raises on an empty batch."""
    a = np.asarray(logits, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.shape[0] == 0:
        raise ValueError("empty batch")
    kind = spec.kind
    if kind is LossKind.CE:
        return ce_batch(a, classes)
    if kind is LossKind.WCE:
        return ce_batch(a, classes, spec.class_weights)
    if kind is LossKind.FOCAL:
        return focal_batch(a, classes, spec.gamma, spec.class_weights)
    c = _check_classes(classes, a.shape[0], a.shape[1])
    return mse_batch(a, spec.table.targets[c])


def make_loss_spec(kind, class_counts: Sequence[int], alpha: float | None = None,
                   gamma: float = 2.0) -> LossSpec:
    """Build the LossSpec for ``kind`` from training-set class counts."""
    kind = LossKind(kind)
    k = len(class_counts)
    if kind is LossKind.WCE:
        return LossSpec(kind, class_weights=median_frequency_weights(class_counts))
    if kind is LossKind.MSE:
        return LossSpec(kind, table=one_hot(k))
    if kind is LossKind.MSE_OL:
        if alpha is None:
            raise ValueError("loss mse-ol needs alpha")
        return LossSpec(kind, table=outlying_labels(class_counts, alpha))
    return LossSpec(kind, gamma=gamma)
