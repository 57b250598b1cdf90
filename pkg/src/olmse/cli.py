"""Command-line entry point: ``olmse {generate,train,evaluate,sweep-alpha,dump-features}``.

Exit codes: 0 on success, 1 for usage or config errors, 2 for runtime errors.

Output directory layout (``--out``)::

    config.json        effective config, echoed by every command
    train.csv val.csv test.csv data_manifest.json     (generate)
    manifest.json epochs.jsonl report.json confusion.csv model.ckpt   (train)
    report_<split>.json                                (evaluate)
    alpha_sweep.csv best_alpha.json                    (sweep-alpha)
    features.csv logits.csv                            (dump-features)

Manifests are byte-identical across reruns except for their ``volatile`` field.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .data import (CsvFormatError, InsufficientSamplesError, InvalidSpecError, load_csv,
                   sample_gaussian_mixture, save_csv, subsample)
from .features import dump_features, save_features_csv, save_logits_csv
from .metrics import evaluate, save_confusion_csv, save_report
from .network import CheckpointError, load_checkpoint, predict, save_checkpoint
from .train import TrainingError, sweep_alpha, train_model, write_epoch_log

SPLITS = ("train", "val", "test")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _volatile(**extra) -> dict:
    return {"created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()), **extra}


def _data_dir(cfg: ExperimentConfig, out: Path) -> Path:
    return Path(cfg.data_dir) if cfg.data_dir else out


def _load_split(cfg: ExperimentConfig, out: Path, split: str):
    path = _data_dir(cfg, out) / f"{split}.csv"
    if not path.is_file():
        raise FileNotFoundError(f"missing {split} split: {path}")
    return load_csv(path, cfg.num_classes), path


def cmd_generate(cfg: ExperimentConfig, out: Path) -> None:
    spec = cfg.mixture_spec()
    counts = cfg.class_counts()
    k = cfg.num_classes
    # the imbalanced train split is carved from a balanced pool
    pool = sample_gaussian_mixture(spec, [max(counts)] * k, stream=0)
    splits = {
        "train": subsample(pool, counts, spec.seed),
        "val": sample_gaussian_mixture(spec, [cfg.val_per_class] * k, stream=1),
        "test": sample_gaussian_mixture(spec, [cfg.test_per_class] * k, stream=2),
    }
    hashes = {}
    for name, ds in splits.items():
        path = out / f"{name}.csv"
        save_csv(ds, path)
        hashes[name] = _sha256(path)
    _write_json(out / "data_manifest.json", {
        "counts": {name: ds.class_counts.tolist() for name, ds in splits.items()},
        "data_seed": spec.seed,
        "sha256": hashes,
        "volatile": _volatile(),
    })
    print(f"wrote {', '.join(SPLITS)} to {out}; train counts {counts}")


def cmd_train(cfg: ExperimentConfig, out: Path) -> None:
    train, train_path = _load_split(cfg, out, "train")
    val, val_path = _load_split(cfg, out, "val")
    test, test_path = _load_split(cfg, out, "test")
    cfg.check_batch_size(len(train))
    tc = cfg.train_config()
    result = train_model(train, val if len(val) else None, tc)
    write_epoch_log(result.records, out / "epochs.jsonl")
    rep = evaluate(test.labels, predict(result.model, test.features), cfg.num_classes)
    save_report(rep, out / "report.json")
    save_confusion_csv(rep.confusion, out / "confusion.csv")
    save_checkpoint(result.model, out / "model.ckpt")
    _write_json(out / "manifest.json", {
        "loss": tc.loss.value,
        "alpha": tc.alpha,
        "seed": tc.seed,
        "layer_sizes": list(result.model.layer_sizes),
        "train_counts": train.class_counts.tolist(),
        "dataset_sha256": {"train": _sha256(train_path), "val": _sha256(val_path),
                           "test": _sha256(test_path)},
        "checkpoint_sha256": _sha256(out / "model.ckpt"),
        "volatile": _volatile(wall_seconds=result.wall_seconds),
    })
    print(f"test accuracy {rep.accuracy:.4f}  macro-F {rep.macro_f:.4f}  mIoU {rep.miou:.4f}")


def _checkpoint(args, out: Path) -> Path:
    return Path(args.checkpoint) if args.checkpoint else out / "model.ckpt"


def cmd_evaluate(cfg: ExperimentConfig, out: Path, args) -> None:
    model = load_checkpoint(_checkpoint(args, out))
    ds, _ = _load_split(cfg, out, args.split)
    rep = evaluate(ds.labels, predict(model, ds.features), model.num_classes)
    save_report(rep, out / f"report_{args.split}.json")
    print(f"{args.split}: accuracy {rep.accuracy:.4f}  macro-F {rep.macro_f:.4f}  "
          f"mIoU {rep.miou:.4f}")


def cmd_sweep_alpha(cfg: ExperimentConfig, out: Path) -> None:
    train, _ = _load_split(cfg, out, "train")
    val, _ = _load_split(cfg, out, "val")
    cfg.check_batch_size(len(train))
    tc = cfg.override(loss="mse-ol", alpha=cfg.alpha or 1.0).train_config()
    seeds = cfg.seed_list()
    best, rows = sweep_alpha(train, val, cfg.alpha_candidates, tc, seeds,
                             cfg.selection_metric, cfg.workers)
    lines = ["alpha,mean,std," + ",".join(f"seed{s}" for s in seeds)]
    for r in rows:
        lines.append(",".join([repr(r.alpha), repr(r.mean), repr(r.std)]
                              + [repr(v) for v in r.scores]))
    (out / "alpha_sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    best_row = next(r for r in rows if r.alpha == best)
    _write_json(out / "best_alpha.json", {
        "alpha": best, "metric": cfg.selection_metric,
        "mean": best_row.mean, "std": best_row.std, "seeds": seeds})
    for r in rows:
        mark = "  <- best" if r.alpha == best else ""
        print(f"alpha={r.alpha:g}  {cfg.selection_metric} {r.mean:.4f} (+-{r.std:.4f}){mark}")


def cmd_dump_features(cfg: ExperimentConfig, out: Path, args) -> None:
    model = load_checkpoint(_checkpoint(args, out))
    ds, _ = _load_split(cfg, out, args.split)
    dump = dump_features(model, ds, args.split)
    save_features_csv(dump, out / "features.csv")
    save_logits_csv(dump, out / "logits.csv")
    print(f"wrote {len(dump)} rows to {out / 'features.csv'}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="training seed (also the data seed "
                                                  "unless data_seed is set)")
    common.add_argument("--loss", choices=["ce", "wce", "focal", "mse", "mse-ol"])
    common.add_argument("--alpha", type=float, help="outlying-label scale")
    common.add_argument("--out", default=".", help="output directory")
    split_args = _Parser(add_help=False)
    split_args.add_argument("--checkpoint", help="model checkpoint (default OUT/model.ckpt)")
    split_args.add_argument("--split", choices=SPLITS, default="test")

    parser = _Parser(prog="olmse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="write train/val/test CSVs")
    sub.add_parser("train", parents=[common], help="train and evaluate one model")
    sub.add_parser("evaluate", parents=[common, split_args], help="score a checkpoint")
    sub.add_parser("sweep-alpha", parents=[common], help="select alpha on validation data")
    sub.add_parser("dump-features", parents=[common, split_args],
                   help="export penultimate features and logits")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        cfg = cfg.override(seed=args.seed, loss=args.loss, alpha=args.alpha)
        cfg.validate(args.command)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        cfg.dump(out / "config.json")
        if args.command == "generate":
            cmd_generate(cfg, out)
        elif args.command == "train":
            cmd_train(cfg, out)
        elif args.command == "evaluate":
            cmd_evaluate(cfg, out, args)
        elif args.command == "sweep-alpha":
            cmd_sweep_alpha(cfg, out)
        else:
            cmd_dump_features(cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, CsvFormatError, CheckpointError, TrainingError, InvalidSpecError,
            InsufficientSamplesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
