"""Mini-batch SGD with momentum, polynomial learning-rate decay, and alpha selection.

Shuffling uses numpy's PCG64 bit generator (``np.random.default_rng``), whose
output stream is fixed by the seed on every platform. The shuffle permutes a
canonical ordering of the training rows (sorted by label, then by feature
columns), so the input row order never influences training.
"""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import LabeledDataset
from .losses import LossKind, LossSpec, batch_loss, make_loss_spec
from .metrics import evaluate
from .network import MlpModel, backward, forward, init_model, predict

POLY_POWER = 0.9


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    loss: LossKind = LossKind.CE
    alpha: float | None = None
    gamma: float = 2.0
    lr_base: float = 0.05
    epoch_max: int = 200
    batch_size: int = 64
    momentum: float = 0.9
    weight_decay: float = 5e-4
    seed: int = 0
    schedule: str = "poly"
    hidden: tuple[int, ...] = (16, 2)
    grad_clip: float | None = 1.0

    def __post_init__(self):
        object.__setattr__(self, "loss", LossKind(self.loss))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.lr_base >= 0:
            raise ValueError(f"lr_base must be >= 0, got {self.lr_base}")
        if self.epoch_max < 1:
            raise ValueError(f"epoch_max must be >= 1, got {self.epoch_max}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 <= self.momentum < 1:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.schedule not in ("poly", "constant"):
            raise ValueError(f"schedule must be 'poly' or 'constant', got {self.schedule!r}")
        if self.loss is LossKind.MSE_OL and (self.alpha is None or not self.alpha > 0):
            raise ValueError("loss mse-ol requires alpha > 0")
        if self.grad_clip is not None and not self.grad_clip > 0:
            raise ValueError(f"grad_clip must be > 0, got {self.grad_clip}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    val_accuracy: float | None
    val_macro_f: float | None

    def to_json(self) -> str:
        # field order is part of the log format
        return json.dumps({
            "epoch": self.epoch,
            "lr": self.lr,
            "train_loss": self.train_loss,
            "val_accuracy": self.val_accuracy,
            "val_macro_f": self.val_macro_f,
        })


@dataclass
class TrainResult:
    model: MlpModel
    records: list[EpochRecord]
    wall_seconds: float


def poly_lr(lr_base: float, epoch: float, epoch_max: float) -> float:
    """lr_base * (1 - epoch / epoch_max) ** 0.9."""
    if not 0 <= epoch <= epoch_max:
        raise ValueError(f"epoch {epoch} outside [0, {epoch_max}]")
    return lr_base * (1.0 - epoch / epoch_max) ** POLY_POWER


def canonical_order(dataset: LabeledDataset) -> np.ndarray:
    """Row indices sorted by label, then lexicographically by features."""
    keys = [dataset.features[:, j] for j in range(dataset.dim - 1, -1, -1)]
    return np.lexsort(keys + [dataset.labels])


def _layer_sizes(dataset: LabeledDataset, config: TrainConfig) -> tuple[int, ...]:
    return (dataset.dim, *config.hidden, dataset.num_classes)


def train_model(dataset: LabeledDataset, val_dataset: LabeledDataset | None,
                config: TrainConfig, loss_spec: LossSpec | None = None,
                model: MlpModel | None = None) -> TrainResult:
    """Train an MLP on ``dataset``; validation scores are recorded every epoch.

    ``loss_spec`` defaults to the one implied by ``config.loss`` and the
    training set's class counts. ``model`` (copied, never mutated) overrides
    the seeded initialisation.
    """
    start = time.perf_counter()
    if len(dataset) == 0:
        raise ValueError("training set is empty")
    if loss_spec is None:
        loss_spec = make_loss_spec(config.loss, dataset.class_counts, config.alpha, config.gamma)
    if model is None:
        model = init_model(_layer_sizes(dataset, config), config.seed)
    else:
        model = model.copy()
    if model.layer_sizes[0] != dataset.dim or model.num_classes != dataset.num_classes:
        raise ValueError(f"model sizes {model.layer_sizes} do not fit data with "
                         f"{dataset.dim} features and {dataset.num_classes} classes")
    if loss_spec.table is not None and loss_spec.table.num_classes != dataset.num_classes:
        raise ValueError("target table class count does not match the dataset")
    if val_dataset is not None and val_dataset.dim != dataset.dim:
        raise ValueError("validation features do not match training features")

    order = canonical_order(dataset)
    x_all, y_all = dataset.features, dataset.labels
    n = len(dataset)
    rng = np.random.default_rng([config.seed, 1])
    params = model.params()
    velocity = [np.zeros_like(p) for p in params]
    records = []
    for epoch in range(config.epoch_max):
        lr = (poly_lr(config.lr_base, epoch, config.epoch_max)
              if config.schedule == "poly" else config.lr_base)
        idx = order[rng.permutation(n)]
        loss_sum = 0.0
        for batch_no, lo in enumerate(range(0, n, config.batch_size)):
            b = idx[lo:lo + config.batch_size]
            trace = forward(model, x_all[b])
            if not np.all(np.isfinite(trace.logits)):
                raise TrainingError(f"non-finite logits at epoch {epoch}, batch {batch_no}, lr {lr}")
            out = batch_loss(loss_spec, trace.logits, y_all[b])
            if not np.all(np.isfinite(out.values)):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {batch_no}, lr {lr}")
            loss_sum += float(out.values.sum())
            grads = backward(model, trace, out.grads / len(b)).params()
            if config.grad_clip is not None:
                norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
                if norm > config.grad_clip:
                    grads = [g * (config.grad_clip / norm) for g in grads]
            for p, g, v in zip(params, grads, velocity):
                if config.weight_decay:
                    g = g + config.weight_decay * p
                v *= config.momentum
                v += g
                p -= lr * v
        val_acc = val_f = None
        if val_dataset is not None and len(val_dataset):
            rep = evaluate(val_dataset.labels, predict(model, val_dataset.features),
                           dataset.num_classes)
            val_acc, val_f = rep.accuracy, rep.macro_f
        records.append(EpochRecord(epoch, lr, loss_sum / n, val_acc, val_f))
    return TrainResult(model, records, time.perf_counter() - start)


def write_epoch_log(records: Sequence[EpochRecord], path) -> None:
    Path(path).write_text("".join(r.to_json() + "\n" for r in records), encoding="utf-8")


@dataclass(frozen=True)
class AlphaRow:
    alpha: float
    scores: tuple[float, ...]  # one per seed, in seed order

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def std(self) -> float:
        return float(np.std(self.scores))


def _score_alpha(args) -> float:
    dataset, val_dataset, config, metric = args
    try:
        result = train_model(dataset, val_dataset, config)
    except (TrainingError, ValueError) as exc:
        raise TrainingError(f"alpha={config.alpha}, seed={config.seed}: {exc}") from exc
    rep = evaluate(val_dataset.labels, predict(result.model, val_dataset.features),
                   dataset.num_classes)
    return rep.metric(metric)


def sweep_alpha(dataset: LabeledDataset, val_dataset: LabeledDataset,
                candidates: Sequence[float], config: TrainConfig,
                seeds: Sequence[int] | None = None, metric: str = "macro_f",
                workers: int = 1) -> tuple[float, list[AlphaRow]]:
    """Train mse-ol once per (alpha, seed) and score each on ``val_dataset``.

    Returns the alpha with the best mean score (ties go to the smaller alpha)
    and one row per candidate in the order given. Runs are independent, so
    ``workers > 1`` only changes wall-clock time, never the result.
    """
    if not len(candidates):
        raise ValueError("no alpha candidates given")
    if val_dataset is None or len(val_dataset) == 0:
        raise ValueError("alpha selection needs a non-empty validation set")
    seeds = [config.seed] if seeds is None else list(seeds)
    if not seeds:
        raise ValueError("no seeds given")
    jobs = [(dataset, val_dataset,
             config.replace(loss=LossKind.MSE_OL, alpha=float(a), seed=s), metric)
            for a in candidates for s in seeds]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(_score_alpha, jobs))
    else:
        scores = [_score_alpha(j) for j in jobs]
    rows = [AlphaRow(float(a), tuple(scores[i * len(seeds):(i + 1) * len(seeds)]))
            for i, a in enumerate(candidates)]
    best = min(rows, key=lambda r: (-r.mean, r.alpha))
    return best.alpha, rows


def select_alpha(dataset: LabeledDataset, val_dataset: LabeledDataset,
                 candidates: Sequence[float], config: TrainConfig,
                 metric: str = "macro_f") -> tuple[float, list[tuple[float, float]]]:
    best, rows = sweep_alpha(dataset, val_dataset, candidates, config, metric=metric)
    return best, [(r.alpha, r.scores[0]) for r in rows]


