"""Dataset bundle I/O and synthetic planted-partition graph generation.

On-disk layout of a dataset directory (all text, LF, UTF-8):

    meta.json      {"name", "num_nodes", "num_features", "num_classes"}
    edges.tsv      one "src<TAB>dst" per line, undirected, stored once
    features.csv   N rows of d comma-separated decimals
    labels.csv     N lines of class id
    splits.json    {"train": [...], "val": [...], "test": [...]}
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .graph import SparseGraph, build_graph

REQUIRED_FILES = ["meta.json", "edges.tsv", "features.csv", "labels.csv", "splits.json"]


class DatasetError(ValueError):
    """Raised with the full list of violated invariants."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass
class DatasetBundle:
    graph: SparseGraph
    features: np.ndarray
    clean_labels: np.ndarray
    splits: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def num_classes(self) -> int:
        return int(self.meta["num_classes"])


def _undirected_edges(graph: SparseGraph) -> list[tuple[int, int]]:
    rows, cols = graph.row_ids(), graph.col_indices
    m = rows < cols
    return list(zip(rows[m].tolist(), cols[m].tolist()))


def save_dataset(bundle: DatasetBundle, dir_path: str) -> None:
    os.makedirs(dir_path, exist_ok=True)
    with open(os.path.join(dir_path, "meta.json"), "w") as fh:
        json.dump(bundle.meta, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(dir_path, "edges.tsv"), "w") as fh:
        for u, v in _undirected_edges(bundle.graph):
            fh.write(f"{u}\t{v}\n")
    with open(os.path.join(dir_path, "features.csv"), "w") as fh:
        for row in bundle.features:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    with open(os.path.join(dir_path, "labels.csv"), "w") as fh:
        for y in bundle.clean_labels:
            fh.write(f"{int(y)}\n")
    with open(os.path.join(dir_path, "splits.json"), "w") as fh:
        json.dump({k: np.asarray(v).tolist() for k, v in bundle.splits.items()}, fh)
        fh.write("\n")


def load_dataset(dir_path: str) -> DatasetBundle:
    """Load and validate a dataset directory; reports every violation found."""
    problems = []
    for name in REQUIRED_FILES:
        if not os.path.exists(os.path.join(dir_path, name)):
            problems.append(f"missing file: {name}")
    if problems:
        raise DatasetError(problems)

    with open(os.path.join(dir_path, "meta.json")) as fh:
        meta = json.load(fh)
    for key in ("num_nodes", "num_features", "num_classes"):
        if key not in meta:
            problems.append(f"meta.json missing key: {key}")
    if problems:
        raise DatasetError(problems)
    N, d, C = int(meta["num_nodes"]), int(meta["num_features"]), int(meta["num_classes"])
    if C < 2:
        problems.append("num_classes must be >= 2")

    edges = []
    with open(os.path.join(dir_path, "edges.tsv")) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                problems.append(f"edges.tsv line {lineno}: expected 'src<TAB>dst'")
                continue
            u, v = int(parts[0]), int(parts[1])
            if not (0 <= u < N and 0 <= v < N):
                problems.append(f"edges.tsv line {lineno}: endpoint out of range")
                continue
            edges.append((u, v))

    features = np.loadtxt(
        os.path.join(dir_path, "features.csv"), delimiter=",", ndmin=2, dtype=np.float64
    )
    if features.shape != (N, d):
        problems.append(f"features.csv shape {features.shape} != ({N}, {d})")

    labels = np.full(N, -1, dtype=np.int64)
    with open(os.path.join(dir_path, "labels.csv")) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) != N:
        problems.append(f"labels.csv has {len(lines)} lines, expected {N}")
    else:
        for lineno, ln in enumerate(lines, 1):
            y = int(ln)
            if y < -1 or y >= C:
                problems.append(f"labels.csv line {lineno}: class id {y} out of range")
            else:
                labels[lineno - 1] = y

    with open(os.path.join(dir_path, "splits.json")) as fh:
        raw_splits = json.load(fh)
    splits = {}
    for key in ("train", "val", "test"):
        if key not in raw_splits:
            problems.append(f"splits.json missing key: {key}")
            splits[key] = np.array([], dtype=np.int64)
        else:
            splits[key] = np.asarray(raw_splits[key], dtype=np.int64)
            if splits[key].size and (splits[key].min() < 0 or splits[key].max() >= N):
                problems.append(f"splits.json {key}: index out of range")
    combined = np.concatenate(list(splits.values()))
    if combined.size != np.unique(combined).size:
        problems.append("splits overlap")

    if problems:
        raise DatasetError(problems)
    graph = build_graph(edges, N)
    return DatasetBundle(graph=graph, features=features, clean_labels=labels,
                         splits=splits, meta=meta)


def make_splits(
    num_nodes: int,
    rng: np.random.Generator,
    train_frac: float = 0.05,
    val_frac: float = 0.15,
) -> dict[str, np.ndarray]:
    """Random disjoint train/val/test index lists at the given rates."""
    perm = rng.permutation(num_nodes)
    n_train = max(1, int(round(train_frac * num_nodes)))
    n_val = int(round(val_frac * num_nodes))
    return {
        "train": np.sort(perm[:n_train]),
        "val": np.sort(perm[n_train:n_train + n_val]),
        "test": np.sort(perm[n_train + n_val:]),
    }


def gen_sbm(
    classes: int,
    nodes_per_class: int,
    p_in: float,
    p_out: float,
    feature_dim: int,
    feature_shift: float,
    seed: int,
    name: str = "sbm",
    train_frac: float = 0.05,
    val_frac: float = 0.15,
) -> DatasetBundle:
    """Planted-partition graph with Gaussian class-mean features.

    Class means are random directions scaled by ``feature_shift``; per-node
    features add unit Gaussian noise.  Splits follow the given rates.
    """
    if not (0.0 <= p_out < p_in <= 1.0):
        raise ValueError("require 0 <= p_out < p_in <= 1")
    if feature_shift <= 0:
        raise ValueError("feature_shift must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    N = classes * nodes_per_class
    labels = np.repeat(np.arange(classes), nodes_per_class)

    means = rng.standard_normal((classes, feature_dim))
    means *= feature_shift / np.linalg.norm(means, axis=1, keepdims=True)
    features = means[labels] + rng.standard_normal((N, feature_dim))

    edges = []
    for i in range(N - 1):
        probs = np.where(labels[i + 1:] == labels[i], p_in, p_out)
        hits = np.flatnonzero(rng.random(N - 1 - i) < probs)
        edges.extend((i, int(i + 1 + j)) for j in hits)

    graph = build_graph(edges, N)
    splits = make_splits(N, rng, train_frac, val_frac)
    meta = {
        "name": name,
        "num_nodes": N,
        "num_features": feature_dim,
        "num_classes": classes,
        "p_in": p_in,
        "p_out": p_out,
        "feature_shift": feature_shift,
        "seed": seed,
    }
    return DatasetBundle(graph=graph, features=features, clean_labels=labels,
                         splits=splits, meta=meta)
