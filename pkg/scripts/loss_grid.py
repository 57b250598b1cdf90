"""Test macro-F of every loss across imbalance ratios on a long-tailed mixture.

    python3 scripts/loss_grid.py --classes 4 --ratios 5 10 50 100 --seeds 0 1 2
"""

import argparse

import numpy as np

from olmse.data import (GaussianMixtureSpec, ImbalanceSpec, long_tailed_counts,
                        sample_gaussian_mixture, subsample, unit_circle_means)
from olmse.metrics import evaluate
from olmse.network import predict
from olmse.train import TrainConfig, select_alpha, train_model

LOSSES = ["ce", "wce", "focal", "mse", "mse-ol"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--classes", type=int, default=4)
    ap.add_argument("--ratios", type=float, nargs="+", default=[5, 10, 50, 100])
    ap.add_argument("--n-max", type=int, default=500)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--stddev", type=float, default=0.5)
    args = ap.parse_args()

    k = args.classes
    print("ratio " + " ".join(f"{name:>16s}" for name in LOSSES))
    for ratio in args.ratios:
        counts = long_tailed_counts(k, ImbalanceSpec("long-tailed", ratio, args.n_max))
        cells = {name: [] for name in LOSSES}
        for seed in args.seeds:
            spec = GaussianMixtureSpec(k, 2, unit_circle_means(k), args.stddev, seed=seed)
            pool = sample_gaussian_mixture(spec, [args.n_max] * k, stream=0)
            train = subsample(pool, counts, seed)
            val = sample_gaussian_mixture(spec, [20] * k, stream=1)
            test = sample_gaussian_mixture(spec, [300] * k, stream=2)
            base = TrainConfig(epoch_max=args.epochs, seed=seed)
            alpha, _ = select_alpha(train, val, list(range(1, 9)), base)
            for name in LOSSES:
                cfg = base.replace(loss=name, alpha=alpha if name == "mse-ol" else None)
                model = train_model(train, None, cfg).model
                cells[name].append(evaluate(test.labels, predict(model, test.features), k).macro_f)
        print(f"{ratio:5g} " + " ".join(
            f"{np.mean(v):8.4f}(+-{np.std(v):.3f})" for v in cells.values()))


if __name__ == "__main__":
    main()
