"""Experiment orchestration: noise injection, multi-seed runs, grid sweeps,
results aggregation, and the runtime overhead benchmark."""

from __future__ import annotations

import itertools
import json
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import DatasetBundle, gen_sbm, load_dataset
from .ensemble import bootstrap_views, gather_labels
from .graph import normalize
from .metrics import LabelQuality, accuracy, multilabel_prf
from .noise import NoiseSpec, UNLABELED, build_transition, flip_labels
from .train import (
    TrainConfig,
    train_confidence,
    train_gcn_ce,
    train_legnn,
    train_propagation,
    predict,
)

METHODS = {
    "gcn": train_gcn_ce,
    "legnn": train_legnn,
    "propagation": train_propagation,
    "confidence": train_confidence,
}

# ablation variants resolve to a trainer plus config overrides
VARIANTS = {
    "legnn_no_negative": ("legnn", {"use_negative": False}),
    "legnn_no_gathering": ("legnn", {"mask_iterations": 1, "mask_rate": 0.0,
                                     "regather_cooldown": 10**9}),
    "legnn_nearest": ("legnn", {"mask_strategy": "nearest"}),
}


@dataclass
class RunResult:
    method: str
    seeds: list[int]
    test_accuracy_mean: float
    test_accuracy_std: float
    wall_time_seconds: list[float]
    label_quality: LabelQuality | None = None
    grid_point: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


def inject_noise(
    labels: np.ndarray,
    splits: dict,
    spec: NoiseSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Corrupt train and validation labels; everything else becomes unlabeled.

    Returns the full-length noisy label array (-1 outside train/val).
    """
    T = build_transition(spec)
    visible = np.full(len(labels), UNLABELED, dtype=np.int64)
    observed = np.concatenate([splits["train"], splits["val"]])
    visible[observed] = labels[observed]
    return flip_labels(visible, T, rng)


def _resolve_method(name: str, cfg: TrainConfig) -> tuple:
    if name in METHODS:
        return METHODS[name], cfg
    if name in VARIANTS:
        base, overrides = VARIANTS[name]
        return METHODS[base], replace(cfg, **overrides)
    raise ValueError(f"unknown method: {name!r}")


def run_single(
    bundle: DatasetBundle,
    method: str,
    noisy_labels: np.ndarray,
    cfg: TrainConfig,
    metric_split: str = "all",
) -> tuple[float, float, LabelQuality | None]:
    """Train one (method, seed) cell; returns (test acc, wall time, quality)."""
    trainer, cfg = _resolve_method(method, cfg)
    t0 = time.perf_counter()
    model, trace = trainer(
        bundle.graph, bundle.features, noisy_labels, bundle.splits, cfg,
        num_classes=bundle.num_classes,
    )
    elapsed = time.perf_counter() - t0
    g = normalize(bundle.graph)
    preds = predict(model, g, bundle.features)
    test_acc = accuracy(preds, bundle.clean_labels, bundle.splits["test"])
    quality = None
    if trace.gathered is not None and trace.gathered.any():
        idx = metric_indices(bundle, metric_split)
        quality = multilabel_prf(trace.gathered, bundle.clean_labels, idx)
    return test_acc, elapsed, quality


def metric_indices(bundle: DatasetBundle, metric_split: str) -> np.ndarray:
    """Node set for label-quality metrics: all non-train, test, or unlabeled."""
    N = bundle.num_nodes
    if metric_split == "all":
        mask = np.ones(N, dtype=bool)
        mask[bundle.splits["train"]] = False
        return np.flatnonzero(mask)
    if metric_split == "test":
        return bundle.splits["test"]
    if metric_split == "unlabeled":
        mask = np.ones(N, dtype=bool)
        mask[bundle.splits["train"]] = False
        mask[bundle.splits["val"]] = False
        return np.flatnonzero(mask)
    raise ValueError(f"unknown metric split: {metric_split!r}")


def _load_bundle(config: dict) -> DatasetBundle:
    if "dataset" in config:
        return load_dataset(config["dataset"])
    if "sbm" in config:
        return gen_sbm(**config["sbm"])
    raise ValueError("config must name either 'dataset' (a path) or 'sbm' (parameters)")


def run_experiment(config: dict | str, out_dir: str | None = None) -> list[RunResult]:
    """Run methods x seeds (x optional grid) on one dataset with shared noise.

    Noise injection derives from the master seed only, so every method in a
    cell sees identical noisy labels.  Results embed the resolved config.
    """
    if isinstance(config, str):
        with open(config) as fh:
            config = json.load(fh)
    bundle = _load_bundle(config)
    methods = config.get("methods", ["gcn", "legnn"])
    seeds = [int(s) for s in config.get("seeds", [0])]
    noise_cfg = config.get("noise", {"kind": "symmetric", "tau": 0.0})
    base_overrides = config.get("train", {})
    grid = config.get("grid", {})
    metric_split = config.get("metric_split", "all")

    spec = None
    if noise_cfg.get("tau", 0.0) > 0.0:
        spec = NoiseSpec(noise_cfg["kind"], float(noise_cfg["tau"]), bundle.num_classes)

    grid_points = [dict(zip(grid, vals)) for vals in itertools.product(*grid.values())] or [{}]

    results = []
    errors = []
    for point in grid_points:
        per_method: dict[str, list] = {m: [] for m in methods}
        times: dict[str, list] = {m: [] for m in methods}
        quality: dict[str, list] = {m: [] for m in methods}
        for seed in seeds:
            noise_rng = np.random.default_rng(np.random.SeedSequence([seed, 7919]))
            if spec is not None:
                noisy = inject_noise(bundle.clean_labels, bundle.splits, spec, noise_rng)
            else:
                noisy = _visible_labels(bundle)
            for method in methods:
                cfg = TrainConfig(seed=seed, **{**base_overrides, **point})
                try:
                    acc, elapsed, q = run_single(bundle, method, noisy, cfg, metric_split)
                except Exception as exc:  # keep partial results
                    errors.append({"method": method, "seed": seed, "error": repr(exc)})
                    continue
                per_method[method].append(acc)
                times[method].append(elapsed)
                if q is not None:
                    quality[method].append(q)
        for method in methods:
            accs = per_method[method]
            if not accs:
                continue
            q = quality[method][-1] if quality[method] else None
            if quality[method]:
                q = LabelQuality(
                    precision=float(np.mean([x.precision for x in quality[method]])),
                    recall=float(np.mean([x.recall for x in quality[method]])),
                    f1=float(np.mean([x.f1 for x in quality[method]])),
                    coverage=float(np.mean([x.coverage for x in quality[method]])),
                )
            results.append(RunResult(
                method=method,
                seeds=seeds,
                test_accuracy_mean=float(np.mean(accs)),
                test_accuracy_std=float(np.std(accs)),
                wall_time_seconds=times[method],
                label_quality=q,
                grid_point=point,
            ))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        payload = {
            "config": _jsonable(config),
            "results": [r.to_dict() for r in results],
            "errors": errors,
        }
        with open(os.path.join(out_dir, "results.json"), "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        with open(os.path.join(out_dir, "results.csv"), "w") as fh:
            fh.write("method,grid_point,acc_mean,acc_std\n")
            for r in results:
                fh.write(f"{r.method},{json.dumps(r.grid_point).replace(',', ';')},"
                         f"{r.test_accuracy_mean:.6f},{r.test_accuracy_std:.6f}\n")
    return results


def _visible_labels(bundle: DatasetBundle) -> np.ndarray:
    labels = np.full(bundle.num_nodes, UNLABELED, dtype=np.int64)
    observed = np.concatenate([bundle.splits["train"], bundle.splits["val"]])
    labels[observed] = bundle.clean_labels[observed]
    return labels


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    return obj


def bench_overhead(
    bundle: DatasetBundle,
    cfg: TrainConfig,
    noisy_labels: np.ndarray | None = None,
    repeats: int = 3,
) -> dict:
    """Median wall times of backbone training, ensemble training, and the
    gathering phase alone, plus the ensemble/backbone ratio."""
    if noisy_labels is None:
        noisy_labels = _visible_labels(bundle)

    def timed(fn):
        samples = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            samples.append(time.perf_counter() - t0)
        return float(np.median(samples))

    backbone = timed(lambda: train_gcn_ce(
        bundle.graph, bundle.features, noisy_labels, bundle.splits, cfg,
        num_classes=bundle.num_classes))
    ensemble = timed(lambda: train_legnn(
        bundle.graph, bundle.features, noisy_labels, bundle.splits, cfg,
        num_classes=bundle.num_classes))

    g = normalize(bundle.graph)
    model, _ = train_gcn_ce(
        bundle.graph, bundle.features, noisy_labels, bundle.splits, cfg,
        epochs=cfg.warmup_epochs, num_classes=bundle.num_classes)

    def gather_once():
        views = bootstrap_views(g, cfg.mask_rate, cfg.mask_iterations, cfg.seed)
        gather_labels(model, views, bundle.features)

    gathering = timed(gather_once)
    return {
        "backbone_seconds": backbone,
        "ensemble_seconds": ensemble,
        "gathering_seconds": gathering,
        "overhead_ratio": ensemble / backbone if backbone > 0 else float("inf"),
        "num_edges": int((bundle.graph.nnz - bundle.num_nodes) // 2),
        "mask_iterations": cfg.mask_iterations,
    }
