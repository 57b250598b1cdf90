"""Penultimate-layer and logit exports for scatter plots, plus per-class spread."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import LabeledDataset
from .network import MlpModel, forward


@dataclass(frozen=True)
class FeatureDump:
    coords: np.ndarray   # (n, p) penultimate activations
    logits: np.ndarray   # (n, K)
    true: np.ndarray
    pred: np.ndarray
    split: str

    def __len__(self):
        return len(self.true)

    @property
    def num_classes(self) -> int:
        return self.logits.shape[1]


@dataclass(frozen=True)
class ClassSpread:
    count: int
    centroid: np.ndarray | None
    radius: float | None  # mean distance of members from the origin


def dump_features(model: MlpModel, dataset: LabeledDataset, split: str) -> FeatureDump:
    if dataset.dim != model.layer_sizes[0]:
        raise ValueError(f"dataset has {dataset.dim} features, model expects "
                         f"{model.layer_sizes[0]}")
    trace = forward(model, dataset.features.reshape(len(dataset), dataset.dim))
    return FeatureDump(trace.penultimate.copy(), trace.logits.copy(),
                       dataset.labels.copy(), trace.logits.argmax(axis=1), split)


def _spread(points: np.ndarray, labels: np.ndarray, num_classes: int) -> list[ClassSpread]:
    out = []
    for k in range(num_classes):
        members = points[labels == k]
        if len(members) == 0:
            out.append(ClassSpread(0, None, None))
            continue
        out.append(ClassSpread(len(members), members.mean(axis=0),
                               float(np.linalg.norm(members, axis=1).mean())))
    return out


def class_centroid_spread(dump: FeatureDump, num_classes: int | None = None) -> list[ClassSpread]:
    """Centroid and mean radius of each true class in penultimate space.

    Classes with no rows get ``centroid=None, radius=None``.
    """
    if len(dump) == 0:
        raise ValueError("empty feature dump")
    k = dump.num_classes if num_classes is None else num_classes
    return _spread(dump.coords, dump.true, k)


def class_logit_spread(dump: FeatureDump) -> list[ClassSpread]:
    """Same as :func:`class_centroid_spread`, measured on the logits."""
    if len(dump) == 0:
        raise ValueError("empty feature dump")
    return _spread(dump.logits, dump.true, dump.num_classes)


def _write_rows(path, prefix: str, values: np.ndarray, dump: FeatureDump) -> None:
    header = [f"{prefix}{j}" for j in range(values.shape[1])] + ["true", "pred", "split"]
    lines = [",".join(header)]
    for row, t, p in zip(values, dump.true, dump.pred):
        lines.append(",".join([repr(float(v)) for v in row] + [str(int(t)), str(int(p)), dump.split]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def save_features_csv(dump: FeatureDump, path) -> None:
    """Header ``f0..f{p-1},true,pred,split``, one row per sample."""
    _write_rows(path, "f", dump.coords, dump)


def save_logits_csv(dump: FeatureDump, path) -> None:
    """Header ``a0..a{K-1},true,pred,split``, one row per sample."""
    _write_rows(path, "a", dump.logits, dump)
