"""Confusion matrix and the scores derived from it (accuracy, macro F, mIoU)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def confusion(true_labels, pred_labels, num_classes: int) -> np.ndarray:
    """counts[t, p] = number of samples with true class t predicted as p."""
    t = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    p = np.asarray(pred_labels, dtype=np.int64).reshape(-1)
    if t.shape != p.shape:
        raise ValueError(f"{len(t)} true labels but {len(p)} predictions")
    for name, arr in (("true", t), ("predicted", p)):
        if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
            raise ValueError(f"{name} label out of range [0, {num_classes})")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    iou: float


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    per_class: tuple[ClassScores, ...]
    macro_f: float
    miou: float
    confusion: np.ndarray

    def metric(self, name: str) -> float:
        if name in ("macro_f", "macro-f"):
            return self.macro_f
        if name == "miou":
            return self.miou
        if name == "accuracy":
            return self.accuracy
        raise KeyError(f"unknown metric {name!r}")

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f": self.macro_f,
            "miou": self.miou,
            "per_class": [
                {"class": k, "precision": s.precision, "recall": s.recall,
                 "f1": s.f1, "iou": s.iou}
                for k, s in enumerate(self.per_class)
            ],
            "confusion": self.confusion.tolist(),
        }


def report(cm) -> EvalReport:
    """Scores from a confusion matrix; every 0/0 ratio is taken as 0."""
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got shape {cm.shape}")
    if np.any(cm < 0):
        raise ValueError("confusion matrix has negative entries")
    total = cm.sum()
    if total == 0:
        raise ValueError("confusion matrix is all zero")
    tp = np.diag(cm)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    precision = _safe_div(tp, tp + fp)
    recall = _safe_div(tp, tp + fn)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    iou = _safe_div(tp, tp + fp + fn)
    per_class = tuple(ClassScores(float(p), float(r), float(f), float(i))
                      for p, r, f, i in zip(precision, recall, f1, iou))
    return EvalReport(
        accuracy=float(tp.sum() / total),
        per_class=per_class,
        macro_f=float(np.mean(f1)),
        miou=float(np.mean(iou)),
        confusion=cm,
    )


def evaluate(true_labels, pred_labels, num_classes: int) -> EvalReport:
    return report(confusion(true_labels, pred_labels, num_classes))


def save_report(rep: EvalReport, path) -> None:
    Path(path).write_text(json.dumps(rep.to_dict(), indent=2) + "\n", encoding="utf-8")


def save_confusion_csv(cm, path) -> None:
    cm = np.asarray(cm)
    k = cm.shape[0]
    lines = ["true\\pred," + ",".join(str(j) for j in range(k))]
    lines += [f"{i}," + ",".join(str(int(v)) for v in row) for i, row in enumerate(cm)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
