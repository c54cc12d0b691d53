"""Label-noise-robust semi-supervised node classification.

Core idea: bootstrap diverse neighbor contexts by randomly masking each
node's incoming edges, ensemble the per-view argmax/argmin predictions into
high/low-probability candidate label sets, and train with a weighted
bidirectional candidate loss.
"""

from .data import DatasetBundle, DatasetError, gen_sbm, load_dataset, save_dataset
from .ensemble import (
    EnsembleSnapshot,
    bootstrap_views,
    gather_labels,
    voting_error_rate,
)
from .estimators import (
    ConfidenceClassifier,
    GCNClassifier,
    LEGNNClassifier,
    PropagationClassifier,
)
from .graph import MaskedGraph, SparseGraph, build_graph, mask_nearest, mask_random, normalize
from .loss import LossReport, bidirectional_loss, negative_loss, positive_loss
from .metrics import LabelQuality, accuracy, clean_coverage, multilabel_prf
from .nn import GcnModel, cross_entropy, gcn_backward, gcn_forward, sgd_step
from .noise import NoiseSpec, build_transition, flip_labels
from .train import (
    TrainConfig,
    TrainTrace,
    predict,
    train_confidence,
    train_gcn_ce,
    train_legnn,
    train_propagation,
)
from .experiment import RunResult, bench_overhead, inject_noise, run_experiment

__version__ = "0.1.0"

__all__ = [
    "DatasetBundle", "DatasetError", "gen_sbm", "load_dataset", "save_dataset",
    "EnsembleSnapshot", "bootstrap_views", "gather_labels", "voting_error_rate",
    "ConfidenceClassifier", "GCNClassifier", "LEGNNClassifier", "PropagationClassifier",
    "MaskedGraph", "SparseGraph", "build_graph", "mask_nearest", "mask_random", "normalize",
    "LossReport", "bidirectional_loss", "negative_loss", "positive_loss",
    "LabelQuality", "accuracy", "clean_coverage", "multilabel_prf",
    "GcnModel", "cross_entropy", "gcn_backward", "gcn_forward", "sgd_step",
    "NoiseSpec", "build_transition", "flip_labels",
    "TrainConfig", "TrainTrace", "predict",
    "train_confidence", "train_gcn_ce", "train_legnn", "train_propagation",
    "RunResult", "bench_overhead", "inject_noise", "run_experiment",
]
