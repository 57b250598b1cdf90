"""Labeled datasets, imbalanced count generators, Gaussian-mixture sampling and CSV I/O."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np


class InvalidSpecError(ValueError):
    pass


class InsufficientSamplesError(ValueError):
    pass


class CsvFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    class_counts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim == 1 and features.size == 0:
            features = features.reshape(0, 0)
        if features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {features.shape}")
        if labels.ndim != 1 or len(labels) != len(features):
            raise ValueError(
                f"{len(features)} feature rows but labels have shape {labels.shape}")
        if self.num_classes < 1:
            raise ValueError(f"num_classes must be positive, got {self.num_classes}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        counts = np.bincount(labels, minlength=self.num_classes)
        counts.setflags(write=False)
        object.__setattr__(self, "class_counts", counts)

    def __len__(self):
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def take(self, indices) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[indices], self.labels[indices], self.num_classes)


class ImbalanceKind(str, enum.Enum):
    LONG_TAILED = "long-tailed"
    STEP = "step"


@dataclass(frozen=True)
class ImbalanceSpec:
    kind: ImbalanceKind
    ratio: float
    n_max: int

    def __post_init__(self):
        object.__setattr__(self, "kind", ImbalanceKind(self.kind))
        if not self.ratio >= 1:
            raise InvalidSpecError(f"imbalance ratio must be >= 1, got {self.ratio}")
        if self.n_max < 1:
            raise InvalidSpecError(f"n_max must be positive, got {self.n_max}")
        if self.n_max < math.ceil(self.ratio):
            raise InvalidSpecError(
                f"n_max={self.n_max} leaves the rarest class empty at ratio {self.ratio}")


@dataclass(frozen=True)
class GaussianMixtureSpec:
    num_classes: int
    dim: int
    means: np.ndarray
    stddev: float | Sequence[float]
    seed: int = 0

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        if means.shape != (self.num_classes, self.dim):
            raise InvalidSpecError(
                f"means must have shape ({self.num_classes}, {self.dim}), got {means.shape}")
        std = np.broadcast_to(np.asarray(self.stddev, dtype=np.float64), (self.num_classes,))
        if np.any(std < 0) or not np.all(np.isfinite(std)):
            raise InvalidSpecError("stddev must be finite and non-negative")
        object.__setattr__(self, "means", means)

    def class_stddev(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.stddev, dtype=np.float64), (self.num_classes,))


def unit_circle_means(num_classes: int, radius: float = 1.0) -> np.ndarray:
    """Class centroids evenly spaced on a circle, class 0 at angle 0."""
    angles = 2 * np.pi * np.arange(num_classes) / num_classes
    return radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def _floor_decay(n_max: int, ratio: float, k: int, m: int) -> int:
    """Exact floor(n_max * ratio**(-k/m)) for a float ratio.

    c <= n_max * ratio**(-k/m)  iff  c**m * ratio**k <= n_max**m, which is
    checked in rational arithmetic around the floating-point estimate.
    """
    r = Fraction(ratio)
    bound = Fraction(n_max) ** m

    def fits(c: int) -> bool:
        return Fraction(c) ** m * r ** k <= bound

    c = int(math.floor(n_max * ratio ** (-k / m)))
    while c > 0 and not fits(c):
        c -= 1
    while fits(c + 1):
        c += 1
    return c


def _check_counts(counts: list[int]) -> list[int]:
    if min(counts) < 1:
        raise InvalidSpecError(f"generated counts {counts} contain an empty class")
    return counts


def long_tailed_counts(num_classes: int, spec: ImbalanceSpec) -> list[int]:
    """Exponentially decaying counts, n_max * ratio**(-k / (K - 1))."""
    if spec.kind is not ImbalanceKind.LONG_TAILED:
        raise InvalidSpecError(f"expected a long-tailed spec, got {spec.kind.value}")
    if num_classes < 2:
        raise InvalidSpecError(f"need at least 2 classes, got {num_classes}")
    counts = [_floor_decay(spec.n_max, spec.ratio, k, num_classes - 1)
              for k in range(num_classes)]
    return _check_counts(counts)


def step_counts(num_classes: int, spec: ImbalanceSpec) -> list[int]:
    """First ceil(K/2) classes get n_max, the rest floor(n_max / ratio)."""
    if spec.kind is not ImbalanceKind.STEP:
        raise InvalidSpecError(f"expected a step spec, got {spec.kind.value}")
    if num_classes < 2:
        raise InvalidSpecError(f"need at least 2 classes, got {num_classes}")
    n_frequent = math.ceil(num_classes / 2)
    n_rare = _floor_decay(spec.n_max, spec.ratio, 1, 1)
    return _check_counts([spec.n_max] * n_frequent + [n_rare] * (num_classes - n_frequent))


def imbalanced_counts(num_classes: int, spec: ImbalanceSpec) -> list[int]:
    if spec.kind is ImbalanceKind.LONG_TAILED:
        return long_tailed_counts(num_classes, spec)
    return step_counts(num_classes, spec)


def subsample(dataset: LabeledDataset, counts: Sequence[int], seed: int) -> LabeledDataset:
    """Keep counts[k] samples of each class k, drawn uniformly without replacement.

    Selected rows keep their relative order from the input, grouped by class.
    """
    counts = [int(c) for c in counts]
    if len(counts) != dataset.num_classes:
        raise ValueError(f"expected {dataset.num_classes} counts, got {len(counts)}")
    for k, (want, have) in enumerate(zip(counts, dataset.class_counts)):
        if want < 0:
            raise ValueError(f"negative count for class {k}")
        if want > have:
            raise InsufficientSamplesError(
                f"class {k}: requested {want} samples but only {have} available")
    rng = np.random.default_rng(seed)
    keep = []
    for k, want in enumerate(counts):
        members = np.flatnonzero(dataset.labels == k)
        chosen = rng.choice(len(members), size=want, replace=False)
        keep.append(members[np.sort(chosen)])
    return dataset.take(np.concatenate(keep) if keep else [])


def sample_gaussian_mixture(spec: GaussianMixtureSpec, counts_per_class: Sequence[int],
                            stream: int = 0) -> LabeledDataset:
    """Draw counts_per_class[k] points from N(means[k], stddev_k^2 I).

    ``stream`` selects an independent random stream under the same seed, so
    train/val/test splits can come from one spec without overlapping draws.
    """
    if len(counts_per_class) != spec.num_classes:
        raise InvalidSpecError(
            f"expected {spec.num_classes} counts, got {len(counts_per_class)}")
    rng = np.random.default_rng([spec.seed, stream])
    std = spec.class_stddev()
    blocks, labels = [], []
    for k, n in enumerate(counts_per_class):
        if n < 0:
            raise InvalidSpecError(f"negative count for class {k}")
        blocks.append(spec.means[k] + std[k] * rng.standard_normal((int(n), spec.dim)))
        labels.append(np.full(int(n), k, dtype=np.int64))
    return LabeledDataset(np.concatenate(blocks), np.concatenate(labels), spec.num_classes)


def save_csv(dataset: LabeledDataset, path) -> None:
    """Write ``f0..f{D-1},label`` rows; floats use shortest round-trip repr."""
    header = [f"f{j}" for j in range(dataset.dim)] + ["label"]
    lines = [",".join(header)]
    for row, label in zip(dataset.features, dataset.labels):
        lines.append(",".join([repr(float(v)) for v in row] + [str(int(label))]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_csv(path, num_classes: int | None = None) -> LabeledDataset:
    """Read a dataset written by :func:`save_csv`.

    The class count defaults to ``max(label) + 1``. Errors carry the 1-based
    line number of the offending row.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if "label" not in header:
        raise CsvFormatError(f"{path}: line 1: missing 'label' column")
    label_col = header.index("label")
    width = len(header)
    features, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise CsvFormatError(
                f"{path}: line {lineno}: expected {width} cells, got {len(row)}")
        try:
            values = [float(c) for i, c in enumerate(row) if i != label_col]
            label = int(row[label_col])
        except ValueError as exc:
            raise CsvFormatError(f"{path}: line {lineno}: {exc}") from None
        if label < 0:
            raise CsvFormatError(f"{path}: line {lineno}: negative label {label}")
        features.append(values)
        labels.append(label)
    if not labels:
        raise CsvFormatError(f"{path}: no data rows")
    k = max(labels) + 1 if num_classes is None else num_classes
    if max(labels) >= k:
        raise CsvFormatError(f"{path}: label {max(labels)} out of range for {k} classes")
    return LabeledDataset(np.array(features, dtype=np.float64).reshape(len(labels), width - 1),
                          np.array(labels, dtype=np.int64), k)
