"""MSE loss with outlying labels for class-imbalanced classification."""

from .data import (GaussianMixtureSpec, ImbalanceKind, ImbalanceSpec, LabeledDataset,
                   load_csv, long_tailed_counts, sample_gaussian_mixture, save_csv,
                   step_counts, subsample, unit_circle_means)
from .features import class_centroid_spread, class_logit_spread, dump_features
from .labels import TargetTable, one_hot, outlying_labels, target_for
from .losses import (LossKind, batch_loss, ce_loss, focal_loss, median_frequency_weights,
                     mse_loss, softmax)
from .metrics import EvalReport, confusion, evaluate, report
from .network import MlpModel, backward, forward, init_model, predict
from .train import TrainConfig, poly_lr, select_alpha, sweep_alpha, train_model

__version__ = "0.1.0"
