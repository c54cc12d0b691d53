"""Training procedures: plain cross-entropy GCN, the masked-view ensemble
framework, and the propagation / confidence label-correction baselines.

All trainers run a fixed full-batch epoch budget, snapshot the best model by
noisy-validation accuracy, and are bit-deterministic for a fixed
(seed, config, dataset).  Clean labels are never read here.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ensemble import (
    EnsembleSnapshot,
    bootstrap_views,
    gather_labels,
    make_snapshot,
)
from .graph import SparseGraph, mask_nearest, normalize
from .loss import bidirectional_loss
from .nn import GcnModel, cross_entropy, gcn_backward, gcn_forward, sgd_step
from .noise import UNLABELED


@dataclass
class TrainConfig:
    epochs: int = 200
    warmup_epochs: int = 50
    learning_rate: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 5e-4
    dropout: float = 0.5
    hidden: int = 64
    mask_rate: float = 0.5
    mask_iterations: int = 15
    mask_strategy: str = "random"
    weight_mode: str = "candidate"
    regather_cooldown: int = 20
    use_negative: bool = True
    confidence_threshold: float = 0.99
    inner_epochs: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0.0 <= self.mask_rate < 1.0:
            raise ValueError("mask_rate must be in [0, 1)")
        if self.mask_iterations < 1:
            raise ValueError("mask_iterations must be >= 1")
        if self.regather_cooldown < 1:
            raise ValueError("regather_cooldown must be >= 1")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_accuracy: float
    regathered: bool


@dataclass
class TrainTrace:
    records: list[EpochRecord] = field(default_factory=list)
    final_model: GcnModel | None = None
    best_model: GcnModel | None = None
    best_val_accuracy: float = float("-inf")
    best_epoch: int = 0
    gathered: np.ndarray | None = None
    snapshot: EnsembleSnapshot | None = None

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_acc", "regathered"])
            for r in self.records:
                writer.writerow([r.epoch, f"{r.train_loss:.10g}", f"{r.val_accuracy:.10g}",
                                 int(r.regathered)])


def _rng_of(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def _check_splits(splits: dict, num_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    train = np.asarray(splits["train"], dtype=np.int64)
    val = np.asarray(splits["val"], dtype=np.int64)
    if train.size == 0:
        raise ValueError("empty train split")
    combined = np.concatenate([train, val])
    if combined.size != np.unique(combined).size:
        raise ValueError("train/val splits must be disjoint")
    if combined.min() < 0 or combined.max() >= num_nodes:
        raise ValueError("split index out of range")
    return train, val


def predict(model: GcnModel, graph, X: np.ndarray) -> np.ndarray:
    """Inference-mode class predictions on the (unmasked) graph."""
    Z, _ = gcn_forward(model, graph, X, mode="infer")
    return Z.argmax(axis=1)


def _val_accuracy(model: GcnModel, graph, X, labels, val_idx) -> float:
    if len(val_idx) == 0:
        return float("nan")
    preds = predict(model, graph, X)
    return float(np.mean(preds[val_idx] == labels[val_idx]))


def _num_classes(noisy_labels: np.ndarray, num_classes: int | None) -> int:
    if num_classes is not None:
        return num_classes
    return int(noisy_labels.max()) + 1


def _init_model(cfg: TrainConfig, num_features: int, num_classes: int) -> GcnModel:
    return GcnModel.initialize(
        num_features,
        cfg.hidden,
        num_classes,
        _rng_of(cfg.seed, 0),
        dropout=cfg.dropout,
        learning_rate=cfg.learning_rate,
        momentum=cfg.momentum,
        weight_decay=cfg.weight_decay,
    )


def train_gcn_ce(
    graph: SparseGraph,
    X: np.ndarray,
    noisy_labels: np.ndarray,
    splits: dict,
    cfg: TrainConfig,
    *,
    epochs: int | None = None,
    num_classes: int | None = None,
) -> tuple[GcnModel, TrainTrace]:
    """Full-batch cross-entropy training on the train split."""
    g = normalize(graph)
    train_idx, val_idx = _check_splits(splits, g.num_nodes)
    labels = np.asarray(noisy_labels, dtype=np.int64)
    C = _num_classes(labels, num_classes)
    model = _init_model(cfg, X.shape[1], C)
    drop_rng = _rng_of(cfg.seed, 1)
    budget = cfg.epochs if epochs is None else epochs

    trace = TrainTrace(best_model=model.copy())
    for epoch in range(1, budget + 1):
        Z, cache = gcn_forward(model, g, X, mode="train", rng=drop_rng)
        loss, dZ = cross_entropy(Z, labels, train_idx)
        sgd_step(model, gcn_backward(cache, dZ))
        acc = _val_accuracy(model, g, X, labels, val_idx)
        if acc > trace.best_val_accuracy:
            trace.best_val_accuracy = acc
            trace.best_model = model.copy()
            trace.best_epoch = epoch
        trace.records.append(EpochRecord(epoch, loss, acc, False))
    trace.final_model = model
    return trace.best_model, trace


def train_legnn(
    graph: SparseGraph,
    X: np.ndarray,
    noisy_labels: np.ndarray,
    splits: dict,
    cfg: TrainConfig,
    *,
    num_classes: int | None = None,
) -> tuple[GcnModel, TrainTrace]:
    """Ensemble training: warmup, label gathering, bidirectional-loss epochs.

    The candidate sets come from gathering events; the confidence weights
    over those sets are recomputed every epoch from the current unmasked
    prediction, so supervision progressively concentrates on the candidate
    each node's evolving representation agrees with.  Candidates are
    re-gathered when validation accuracy falls below the running best, at
    most once per ``regather_cooldown`` epochs; never on the first epoch.
    """
    g = normalize(graph)
    train_idx, val_idx = _check_splits(splits, g.num_nodes)
    labels = np.asarray(noisy_labels, dtype=np.int64)
    C = _num_classes(labels, num_classes)

    init_model, _ = train_gcn_ce(
        graph, X, labels, splits, cfg, epochs=cfg.warmup_epochs, num_classes=C
    )
    model = init_model.copy()
    drop_rng = _rng_of(cfg.seed, 2)
    view_seed_rng = _rng_of(cfg.seed, 3)

    def regather(current: GcnModel, epoch: int) -> EnsembleSnapshot:
        if cfg.mask_strategy == "nearest":
            view = mask_nearest(g, X, cfg.mask_rate)
            views = [view] * cfg.mask_iterations
        else:
            views = bootstrap_views(
                g, cfg.mask_rate, cfg.mask_iterations, int(view_seed_rng.integers(2**31))
            )
        return gather_labels(current, views, X, cfg.weight_mode, source_epoch=epoch)

    snapshot = regather(model, 0)
    last_gather = 0
    trace = TrainTrace(best_model=model.copy())
    for epoch in range(1, cfg.epochs + 1):
        Z_ref, _ = gcn_forward(model, g, X, mode="infer")
        snapshot = make_snapshot(
            Z_ref, snapshot.yp, snapshot.yn, cfg.weight_mode, snapshot.source_epoch
        )
        Z, cache = gcn_forward(model, g, X, mode="train", rng=drop_rng)
        report = bidirectional_loss(Z, snapshot, use_negative=cfg.use_negative)
        sgd_step(model, gcn_backward(cache, report.dZ))
        acc = _val_accuracy(model, g, X, labels, val_idx)
        declined = acc < trace.best_val_accuracy
        if acc >= trace.best_val_accuracy:
            trace.best_val_accuracy = acc
            trace.best_model = model.copy()
            trace.best_epoch = epoch
        regathered = declined and epoch - last_gather >= cfg.regather_cooldown
        if regathered:
            snapshot = regather(model, epoch)
            last_gather = epoch
        trace.records.append(EpochRecord(epoch, report.total, acc, regathered))
    trace.final_model = model
    trace.snapshot = regather(trace.best_model, cfg.epochs)
    trace.gathered = trace.snapshot.yp
    return trace.best_model, trace


def _neighbor_label_union(
    g: SparseGraph, current: np.ndarray, Z_ref: np.ndarray, C: int
) -> np.ndarray:
    """Union of current labels over each node's non-self neighbors.

    Nodes with no labeled neighbor fall back to their own current label, or to
    the model's argmax when they carry no label at all.
    """
    N = g.num_nodes
    yp = np.zeros((N, C), dtype=bool)
    rows, cols = g.row_ids(), g.col_indices
    m = (rows != cols) & (current[cols] != UNLABELED)
    yp[rows[m], current[cols[m]]] = True
    lonely = ~yp.any(axis=1)
    own = np.where(current != UNLABELED, current, Z_ref.argmax(axis=1))
    idx = np.flatnonzero(lonely)
    yp[idx, own[idx]] = True
    return yp


def train_propagation(
    graph: SparseGraph,
    X: np.ndarray,
    noisy_labels: np.ndarray,
    splits: dict,
    cfg: TrainConfig,
    *,
    num_classes: int | None = None,
) -> tuple[GcnModel, TrainTrace]:
    """Neighbor-union multi-label baseline.

    Each round collects per-node candidate sets from all neighbors' current
    labels, trains with the bidirectional loss, then replaces every node's
    label by the model's argmax.
    """
    g = normalize(graph)
    train_idx, val_idx = _check_splits(splits, g.num_nodes)
    labels = np.asarray(noisy_labels, dtype=np.int64)
    C = _num_classes(labels, num_classes)

    init_model, _ = train_gcn_ce(
        graph, X, labels, splits, cfg, epochs=cfg.warmup_epochs, num_classes=C
    )
    model = init_model.copy()
    drop_rng = _rng_of(cfg.seed, 4)
    current = labels.copy()

    trace = TrainTrace(best_model=model.copy())
    epoch = 0
    yp = None
    while epoch < cfg.epochs:
        Z_ref, _ = gcn_forward(model, g, X, mode="infer")
        yp = _neighbor_label_union(g, current, Z_ref, C)
        yn = np.zeros((g.num_nodes, C), dtype=bool)
        yn[np.arange(g.num_nodes), Z_ref.argmin(axis=1)] = True
        snapshot = make_snapshot(Z_ref, yp, yn, cfg.weight_mode, source_epoch=epoch)
        for _ in range(min(cfg.inner_epochs, cfg.epochs - epoch)):
            epoch += 1
            Z, cache = gcn_forward(model, g, X, mode="train", rng=drop_rng)
            report = bidirectional_loss(Z, snapshot, use_negative=cfg.use_negative)
            sgd_step(model, gcn_backward(cache, report.dZ))
            acc = _val_accuracy(model, g, X, labels, val_idx)
            if acc > trace.best_val_accuracy:
                trace.best_val_accuracy = acc
                trace.best_model = model.copy()
                trace.best_epoch = epoch
            trace.records.append(EpochRecord(epoch, report.total, acc, False))
        current = predict(model, g, X)
    trace.final_model = model
    trace.gathered = yp
    return trace.best_model, trace


def train_confidence(
    graph: SparseGraph,
    X: np.ndarray,
    noisy_labels: np.ndarray,
    splits: dict,
    cfg: TrainConfig,
    *,
    num_classes: int | None = None,
) -> tuple[GcnModel, TrainTrace]:
    """Confidence-filtered self-training baseline.

    Each round keeps only nodes whose top predicted probability exceeds the
    threshold and retrains with cross-entropy on those pseudo-labels.  Rounds
    with no confident node are skipped with a warning.
    """
    g = normalize(graph)
    train_idx, val_idx = _check_splits(splits, g.num_nodes)
    labels = np.asarray(noisy_labels, dtype=np.int64)
    C = _num_classes(labels, num_classes)

    init_model, _ = train_gcn_ce(
        graph, X, labels, splits, cfg, epochs=cfg.warmup_epochs, num_classes=C
    )
    model = init_model.copy()
    drop_rng = _rng_of(cfg.seed, 5)

    trace = TrainTrace(best_model=model.copy())
    rounds = max(1, -(-cfg.epochs // cfg.inner_epochs))
    epoch = 0
    gathered = np.zeros((g.num_nodes, C), dtype=bool)
    for _ in range(rounds):
        Z, _ = gcn_forward(model, g, X, mode="infer")
        conf = Z.max(axis=1)
        pred = Z.argmax(axis=1)
        selected = np.flatnonzero(conf > cfg.confidence_threshold)
        if selected.size == 0:
            warnings.warn("no node above confidence threshold; round skipped", stacklevel=2)
            continue
        gathered = np.zeros((g.num_nodes, C), dtype=bool)
        gathered[selected, pred[selected]] = True
        pseudo = np.full(g.num_nodes, UNLABELED, dtype=np.int64)
        pseudo[selected] = pred[selected]
        for _ in range(min(cfg.inner_epochs, cfg.epochs - epoch)):
            epoch += 1
            Zt, cache = gcn_forward(model, g, X, mode="train", rng=drop_rng)
            loss, dZ = cross_entropy(Zt, pseudo, selected)
            sgd_step(model, gcn_backward(cache, dZ))
            acc = _val_accuracy(model, g, X, labels, val_idx)
            if acc > trace.best_val_accuracy:
                trace.best_val_accuracy = acc
                trace.best_model = model.copy()
                trace.best_epoch = epoch
            trace.records.append(EpochRecord(epoch, loss, acc, False))
    trace.final_model = model
    trace.gathered = gathered
    return trace.best_model, trace
