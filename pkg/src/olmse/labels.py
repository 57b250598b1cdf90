"""Teacher vectors per class: one-hot and count-dependent outlying labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class LabelKind(str, enum.Enum):
    ONE_HOT = "one-hot"
    OUTLYING = "outlying"


@dataclass(frozen=True)
class TargetTable:
    """Row k is the teacher vector used when the true class is k."""

    targets: np.ndarray
    alpha: float
    kind: LabelKind

    def __post_init__(self):
        targets = np.array(self.targets, dtype=np.float64)
        targets.setflags(write=False)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "kind", LabelKind(self.kind))

    @property
    def num_classes(self) -> int:
        return self.targets.shape[0]

    def multipliers(self) -> np.ndarray:
        """Hot value of each row divided by alpha."""
        return np.diag(self.targets) / self.alpha


def one_hot(num_classes: int) -> TargetTable:
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")
    return TargetTable(np.eye(num_classes), 1.0, LabelKind.ONE_HOT)


def outlying_labels(class_counts: Sequence[int], alpha: float) -> TargetTable:
    """Scaled one-hot targets whose hot value grows as the class gets rarer.

    Classes are ranked by sample count, most frequent first; the class at rank
    r (0-based) gets hot value (r + 1) * alpha. Equal counts keep ascending
    class-index order, so the lower index gets the smaller value.
    """
    counts = np.asarray(class_counts)
    if counts.ndim != 1 or len(counts) < 2:
        raise ValueError(f"need counts for at least 2 classes, got {class_counts!r}")
    if np.any(counts < 1):
        raise ValueError(f"class counts must be >= 1, got {class_counts!r}")
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    num_classes = len(counts)
    # stable argsort of -counts: descending count, ascending index among ties
    order = np.argsort(-counts, kind="stable")
    new_label = np.zeros((num_classes, num_classes))
    base = np.eye(num_classes)
    for n, k in enumerate(order):
        new_label[k] = base[k] * (n + 1)
    return TargetTable(new_label * alpha, float(alpha), LabelKind.OUTLYING)


def target_for(table: TargetTable, class_index: int) -> np.ndarray:
    if not 0 <= class_index < table.num_classes:
        raise IndexError(f"class {class_index} out of range for {table.num_classes} classes")
    return table.targets[class_index]
