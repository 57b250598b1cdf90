"""Flat experiment configuration shared by every CLI command.

A config file is a single JSON object whose keys are the field names of
:class:`ExperimentConfig`. Unknown keys are rejected; omitted keys take the
defaults below.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import (GaussianMixtureSpec, ImbalanceKind, ImbalanceSpec, InvalidSpecError,
                   imbalanced_counts, unit_circle_means)
from .losses import LossKind
from .train import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # data
    num_classes: int = 3
    dim: int = 2
    means: list | None = None       # default: unit circle (dim 2 only)
    stddev: float = 0.6
    data_seed: int | None = None    # default: seed
    imbalance: str = "long-tailed"
    ratio: float = 50.0
    n_max: int = 1000
    train_counts: list | None = None  # overrides imbalance/ratio/n_max
    val_per_class: int = 5
    test_per_class: int = 500
    # model and training
    hidden: list = field(default_factory=lambda: [16, 2])
    loss: str = "ce"
    alpha: float | None = None
    gamma: float = 2.0
    lr_base: float = 0.05
    epoch_max: int = 200
    batch_size: int = 64
    momentum: float = 0.9
    weight_decay: float = 5e-4
    grad_clip: float | None = 1.0
    schedule: str = "poly"
    seed: int = 0
    # alpha sweep
    seeds: list | None = None       # default: [seed]
    alpha_candidates: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6, 7, 8])
    selection_metric: str = "macro_f"
    workers: int = 1
    # paths
    data_dir: str | None = None     # default: the output directory

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(raw) - cls.field_names())
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**raw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(raw)

    def override(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    # derived objects -------------------------------------------------

    def effective_data_seed(self) -> int:
        return self.seed if self.data_seed is None else self.data_seed

    def mixture_spec(self) -> GaussianMixtureSpec:
        if self.means is None:
            if self.dim != 2:
                raise ConfigError("means must be given when dim != 2")
            means = unit_circle_means(self.num_classes)
        else:
            means = np.asarray(self.means, dtype=np.float64)
        try:
            return GaussianMixtureSpec(self.num_classes, self.dim, means, self.stddev,
                                       self.effective_data_seed())
        except InvalidSpecError as exc:
            raise ConfigError(str(exc)) from None

    def imbalance_spec(self) -> ImbalanceSpec:
        try:
            return ImbalanceSpec(ImbalanceKind(self.imbalance), self.ratio, self.n_max)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def class_counts(self) -> list[int]:
        if self.train_counts is not None:
            counts = [int(c) for c in self.train_counts]
            if len(counts) != self.num_classes or min(counts) < 1:
                raise ConfigError(
                    f"train_counts must list {self.num_classes} positive counts, got {counts}")
            return counts
        try:
            return imbalanced_counts(self.num_classes, self.imbalance_spec())
        except InvalidSpecError as exc:
            raise ConfigError(str(exc)) from None

    def train_config(self) -> TrainConfig:
        try:
            return TrainConfig(
                loss=self.loss, alpha=self.alpha, gamma=self.gamma, lr_base=self.lr_base,
                epoch_max=self.epoch_max, batch_size=self.batch_size, momentum=self.momentum,
                weight_decay=self.weight_decay, seed=self.seed, schedule=self.schedule,
                hidden=tuple(self.hidden), grad_clip=self.grad_clip)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def seed_list(self) -> list[int]:
        return [self.seed] if self.seeds is None else [int(s) for s in self.seeds]

    def validate(self, command: str) -> None:
        """Check everything ``command`` depends on before any work starts."""
        if self.num_classes < 2:
            raise ConfigError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.train_counts is None and not self.ratio >= 1:
            raise ConfigError(f"ratio must be >= 1, got {self.ratio}")
        if self.val_per_class < 0 or self.test_per_class < 1:
            raise ConfigError("val_per_class must be >= 0 and test_per_class >= 1")
        try:
            LossKind(self.loss)
        except ValueError:
            raise ConfigError(f"unknown loss {self.loss!r}; choose from "
                              f"{', '.join(k.value for k in LossKind)}") from None
        if self.selection_metric not in ("macro_f", "miou", "accuracy"):
            raise ConfigError(f"unknown selection_metric {self.selection_metric!r}")
        if self.loss == LossKind.MSE_OL.value and self.alpha is None and command == "train":
            raise ConfigError("loss mse-ol requires alpha")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if command == "sweep-alpha":
            if not self.alpha_candidates:
                raise ConfigError("alpha_candidates is empty")
            if any(not a > 0 for a in self.alpha_candidates):
                raise ConfigError("alpha candidates must be > 0")
            if not self.seed_list():
                raise ConfigError("seeds is empty")
            if self.val_per_class < 1:
                raise ConfigError("alpha selection needs val_per_class >= 1")
        self.mixture_spec()
        counts = self.class_counts()
        probe = self if command == "train" else dataclasses.replace(self, loss="ce")
        probe.train_config()
        self.check_batch_size(sum(counts))

    def check_batch_size(self, train_size: int) -> None:
        if self.batch_size > train_size:
            raise ConfigError(f"batch_size {self.batch_size} exceeds train size {train_size}")
