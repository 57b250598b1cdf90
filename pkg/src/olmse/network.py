"""Dense feed-forward network with hand-written forward and backward passes.

ReLU sits between consecutive hidden layers only: the last hidden layer (the
penultimate, a 2-D bottleneck by default) and the output layer are affine.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

CHECKPOINT_MAGIC = b"OLMSEMLP"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class MlpModel:
    """weights[i] has shape (layer_sizes[i], layer_sizes[i+1]); layer i maps x -> x @ W + b."""

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("parameter list length does not match layer_sizes")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[i], self.layer_sizes[i + 1])
            if w.shape != shape or b.shape != shape[1:]:
                raise ValueError(f"layer {i}: expected W{shape}, b{shape[1:]}, "
                                 f"got W{w.shape}, b{b.shape}")

    @property
    def num_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def penultimate_width(self) -> int:
        return self.layer_sizes[-2]

    def params(self) -> list[np.ndarray]:
        """Parameters in checkpoint order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "MlpModel":
        return MlpModel(self.layer_sizes, [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params())


@dataclass
class ForwardTrace:
    inputs: np.ndarray             # (n, D)
    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]  # activations[i] is the input to layer i
    layer_sizes: tuple[int, ...]

    @property
    def logits(self) -> np.ndarray:
        return self.pre_activations[-1]

    @property
    def penultimate(self) -> np.ndarray:
        return self.activations[-1]


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


def init_model(layer_sizes: Sequence[int], seed: int) -> MlpModel:
    """He-normal weights, std sqrt(2 / fan_in); zero biases."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or min(sizes) < 1:
        raise ValueError(f"need >= 2 positive layer sizes, got {list(layer_sizes)}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return MlpModel(sizes, weights, biases)


def _has_relu(layer: int, n_layers: int) -> bool:
    """Whether the output of ``layer`` passes through a ReLU."""
    return layer < n_layers - 2


def forward(model: MlpModel, inputs) -> ForwardTrace:
    """Affine maps with ReLU between hidden layers.

    Accepts a single vector (D,) or a batch (n, D); the trace is always batched.
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.layer_sizes[0]:
        raise ValueError(f"input width {x.shape[-1]} does not match model input "
                         f"width {model.layer_sizes[0]}")
    pre, acts = [], []
    h = x
    n_layers = len(model.weights)
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        acts.append(h)
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if _has_relu(i, n_layers) else z
    return ForwardTrace(x, pre, acts, model.layer_sizes)


def backward(model: MlpModel, trace: ForwardTrace, dlogits) -> Gradients:
    """Reverse-mode gradients of sum_i dlogits_i . logits_i w.r.t. all parameters.

    Per-sample upstream gradients are summed over the batch, so pass
    dLoss/dlogits already divided by n to get mean-loss gradients.
    """
    if trace.layer_sizes != model.layer_sizes:
        raise ValueError("trace was produced by a model with different layer sizes")
    delta = np.asarray(dlogits, dtype=np.float64)
    if delta.ndim == 1:
        delta = delta[None, :]
    if delta.shape != trace.logits.shape:
        raise ValueError(f"upstream gradient shape {delta.shape} does not match "
                         f"logits {trace.logits.shape}")
    n_layers = len(model.weights)
    grad_w: list[np.ndarray] = [None] * n_layers
    grad_b: list[np.ndarray] = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        grad_w[i] = trace.activations[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ model.weights[i].T
            if _has_relu(i - 1, n_layers):
                delta = delta * (trace.pre_activations[i - 1] > 0)
    return Gradients(grad_w, grad_b)


def logits(model: MlpModel, inputs) -> np.ndarray:
    return forward(model, inputs).logits


def predict(model: MlpModel, inputs) -> np.ndarray | int:
    """Index of the largest logit; ties go to the lowest index."""
    out = forward(model, inputs).logits.argmax(axis=1)
    return int(out[0]) if np.ndim(inputs) == 1 else out


def save_checkpoint(model: MlpModel, path) -> None:
    sizes = model.layer_sizes
    buf = bytearray(CHECKPOINT_MAGIC)
    buf += struct.pack("<II", CHECKPOINT_VERSION, len(sizes))
    buf += struct.pack(f"<{len(sizes)}I", *sizes)
    for p in model.params():
        buf += np.ascontiguousarray(p, dtype="<f8").tobytes(order="C")
    Path(path).write_bytes(bytes(buf))


def load_checkpoint(path) -> MlpModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    head = len(CHECKPOINT_MAGIC)
    if raw[:head] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a model checkpoint (bad magic)")
    try:
        version, n_sizes = struct.unpack_from("<II", raw, head)
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        sizes = struct.unpack_from(f"<{n_sizes}I", raw, head + 8)
    except struct.error as exc:
        raise CheckpointError(f"{path}: truncated header") from exc
    offset = head + 8 + 4 * n_sizes
    expected = offset + 8 * sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))
    if len(raw) != expected:
        raise CheckpointError(f"{path}: expected {expected} bytes, found {len(raw)}")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        w = np.frombuffer(raw, dtype="<f8", count=fan_in * fan_out, offset=offset)
        offset += 8 * fan_in * fan_out
        b = np.frombuffer(raw, dtype="<f8", count=fan_out, offset=offset)
        offset += 8 * fan_out
        weights.append(w.reshape(fan_in, fan_out).astype(np.float64))
        biases.append(b.astype(np.float64))
    return MlpModel(tuple(sizes), weights, biases)
