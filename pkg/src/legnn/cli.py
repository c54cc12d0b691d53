"""Command line interface.

Exit codes: 0 on success, 1 on input validation failure, 2 on runtime
failure.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from .data import DatasetError, gen_sbm, load_dataset, save_dataset
from .experiment import (
    bench_overhead,
    inject_noise,
    metric_indices,
    run_experiment,
    run_single,
    _visible_labels,
)
from .graph import normalize
from .metrics import accuracy
from .noise import NoiseSpec, UNLABELED
from .train import TrainConfig, predict


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(data_dir: str):
    try:
        return load_dataset(data_dir)
    except DatasetError as exc:
        _fail("\n".join(exc.problems), 1)


def _train_config(config_path: str | None, seed: int, **extra) -> TrainConfig:
    overrides = {}
    if config_path:
        with open(config_path) as fh:
            overrides = json.load(fh)
    overrides.update(extra)
    try:
        return TrainConfig(seed=seed, **overrides)
    except (TypeError, ValueError) as exc:
        _fail(f"bad config: {exc}", 1)


@click.group()
def main():
    """Noise-robust node classification toolkit."""


@main.command("gen-sbm")
@click.option("--classes", default=5, show_default=True)
@click.option("--nodes-per-class", default=100, show_default=True)
@click.option("--p-in", default=0.05, show_default=True)
@click.option("--p-out", default=0.005, show_default=True)
@click.option("--feature-dim", default=16, show_default=True)
@click.option("--feature-shift", default=1.5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def gen_sbm_cmd(classes, nodes_per_class, p_in, p_out, feature_dim, feature_shift, seed, out):
    """Generate a planted-partition benchmark dataset."""
    try:
        bundle = gen_sbm(classes, nodes_per_class, p_in, p_out,
                         feature_dim, feature_shift, seed)
    except ValueError as exc:
        _fail(str(exc), 1)
    save_dataset(bundle, out)
    click.echo(f"wrote {bundle.num_nodes}-node dataset to {out}")


@main.command("inject-noise")
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--kind", type=click.Choice(["symmetric", "pair"]), default="symmetric",
              show_default=True)
@click.option("--tau", default=0.3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def inject_noise_cmd(data_dir, kind, tau, seed, out):
    """Corrupt train/val labels; writes noisy_labels.csv and noise_meta.json."""
    bundle = _load(data_dir)
    try:
        spec = NoiseSpec(kind, tau, bundle.num_classes)
    except ValueError as exc:
        _fail(str(exc), 1)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7919]))
    noisy = inject_noise(bundle.clean_labels, bundle.splits, spec, rng)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "noisy_labels.csv"), "w") as fh:
        for y in noisy:
            fh.write(f"{int(y)}\n")
    with open(os.path.join(out, "noise_meta.json"), "w") as fh:
        json.dump({"kind": kind, "tau": tau, "seed": seed}, fh)
        fh.write("\n")
    click.echo(f"wrote noisy labels to {out}")


@main.command("train")
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--method", default="legnn", show_default=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True),
              help="noisy_labels.csv; defaults to clean train/val labels")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--metric-split", type=click.Choice(["all", "test", "unlabeled"]),
              default="all", show_default=True)
@click.option("--out", required=True, type=click.Path())
def train_cmd(data_dir, method, labels_path, config_path, seed, metric_split, out):
    """Train one method and write trace.csv, predictions.csv, metrics.json."""
    bundle = _load(data_dir)
    if labels_path:
        noisy = np.loadtxt(labels_path, dtype=np.int64, ndmin=1)
        if noisy.shape[0] != bundle.num_nodes:
            _fail("noisy label file length does not match dataset", 1)
    else:
        noisy = _visible_labels(bundle)
    cfg = _train_config(config_path, seed)
    from .experiment import _resolve_method
    try:
        trainer, cfg = _resolve_method(method, cfg)
    except ValueError as exc:
        _fail(str(exc), 1)
    try:
        model, trace = trainer(bundle.graph, bundle.features, noisy, bundle.splits,
                               cfg, num_classes=bundle.num_classes)
        g = normalize(bundle.graph)
        preds = predict(model, g, bundle.features)
        test_acc = accuracy(preds, bundle.clean_labels, bundle.splits["test"])
    except Exception as exc:
        _fail(f"training failed: {exc}", 2)
    os.makedirs(out, exist_ok=True)
    trace.write_csv(os.path.join(out, "trace.csv"))
    np.savetxt(os.path.join(out, "predictions.csv"), preds, fmt="%d")
    metrics = {"method": method, "seed": seed, "test_accuracy": test_acc,
               "best_val_accuracy": trace.best_val_accuracy,
               "best_epoch": trace.best_epoch}
    if trace.gathered is not None and trace.gathered.any():
        from .metrics import multilabel_prf
        q = multilabel_prf(trace.gathered, bundle.clean_labels,
                           metric_indices(bundle, metric_split))
        metrics["label_quality"] = vars(q)
    with open(os.path.join(out, "metrics.json"), "w") as fh:
        json.dump(metrics, fh, indent=2)
        fh.write("\n")
    click.echo(f"test accuracy: {test_acc:.4f}")


@main.command("evaluate")
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--predictions", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--metric-split", type=click.Choice(["all", "test", "unlabeled"]),
              default="test", show_default=True)
def evaluate_cmd(data_dir, pred_path, metric_split):
    """Score a predictions.csv against the clean labels."""
    bundle = _load(data_dir)
    preds = np.loadtxt(pred_path, dtype=np.int64, ndmin=1)
    if preds.shape[0] != bundle.num_nodes:
        _fail("prediction file length does not match dataset", 1)
    idx = metric_indices(bundle, metric_split)
    click.echo(f"accuracy[{metric_split}]: {accuracy(preds, bundle.clean_labels, idx):.4f}")


@main.command("bench")
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--repeats", default=3, show_default=True)
@click.option("--out", type=click.Path())
def bench_cmd(data_dir, config_path, seed, repeats, out):
    """Time backbone vs ensemble training and the gathering phase."""
    bundle = _load(data_dir)
    cfg = _train_config(config_path, seed)
    try:
        report = bench_overhead(bundle, cfg, repeats=repeats)
    except Exception as exc:
        _fail(f"benchmark failed: {exc}", 2)
    click.echo(json.dumps(report, indent=2))
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "bench.json"), "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")


@main.command("sweep")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="experiment config json (dataset/sbm, methods, noise, seeds, grid)")
@click.option("--out", required=True, type=click.Path())
def sweep_cmd(config_path, out):
    """Run a full experiment grid and aggregate results."""
    try:
        results = run_experiment(config_path, out)
    except DatasetError as exc:
        _fail("\n".join(exc.problems), 1)
    except (ValueError, KeyError) as exc:
        _fail(str(exc), 1)
    except Exception as exc:
        _fail(f"experiment failed: {exc}", 2)
    for r in results:
        point = f" {r.grid_point}" if r.grid_point else ""
        click.echo(f"{r.method}{point}: {100 * r.test_accuracy_mean:.2f} "
                   f"± {100 * r.test_accuracy_std:.2f}")


if __name__ == "__main__":
    main()
