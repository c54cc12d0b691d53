"""Scikit-learn compatible estimator wrappers around the trainers.

The estimators follow the semi-supervised convention of
``sklearn.semi_supervised``: ``y`` holds class ids with -1 for unlabeled
nodes.  The graph is passed to ``fit``/``predict`` as a keyword argument
since it is data, not a hyperparameter.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array

from .graph import SparseGraph, build_graph, normalize
from .nn import gcn_forward
from .train import (
    TrainConfig,
    train_confidence,
    train_gcn_ce,
    train_legnn,
    train_propagation,
)


def _as_graph(graph, num_nodes: int) -> SparseGraph:
    if isinstance(graph, SparseGraph):
        return graph
    return build_graph(list(graph), num_nodes)


class BaseGraphClassifier(BaseEstimator, ClassifierMixin):
    """Shared fit/predict plumbing for the node classifiers."""

    _trainer = None

    def __init__(self, epochs=200, warmup_epochs=50, learning_rate=0.05,
                 momentum=0.9, weight_decay=5e-4, dropout=0.5, hidden=64,
                 seed=0):
        self.epochs = epochs
        self.warmup_epochs = warmup_epochs
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.dropout = dropout
        self.hidden = hidden
        self.seed = seed

    def _config(self) -> TrainConfig:
        params = {k: v for k, v in self.get_params().items()
                  if k in TrainConfig.__dataclass_fields__}
        return TrainConfig(**params)

    def fit(self, X, y, graph=None, val_indices=None):
        """Fit on node features X and labels y (-1 marks unlabeled nodes).

        ``graph`` is a SparseGraph or an undirected edge list over the rows of
        X.  ``val_indices`` selects the labeled nodes used for model
        selection; defaults to the last quarter of the labeled set.
        """
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y must have the same number of rows")
        if graph is None:
            raise ValueError("a graph (SparseGraph or edge list) is required")
        g = _as_graph(graph, X.shape[0])
        labeled = np.flatnonzero(y >= 0)
        if labeled.size == 0:
            raise ValueError("need at least one labeled node")
        if val_indices is None:
            n_val = labeled.size // 4
            val_indices = labeled[labeled.size - n_val:]
        val_indices = np.asarray(val_indices, dtype=np.int64)
        train_indices = np.setdiff1d(labeled, val_indices)
        rest = np.setdiff1d(np.arange(X.shape[0]),
                            np.concatenate([train_indices, val_indices]))
        splits = {"train": train_indices, "val": val_indices, "test": rest}

        self.classes_ = np.arange(int(y.max()) + 1)
        model, trace = type(self)._trainer(
            g, X, y, splits, self._config(), num_classes=len(self.classes_)
        )
        self.model_ = model
        self.trace_ = trace
        self.graph_ = normalize(g)
        return self

    def predict_proba(self, X, graph=None):
        X = check_array(X, dtype=np.float64)
        g = self.graph_ if graph is None else normalize(_as_graph(graph, X.shape[0]))
        Z, _ = gcn_forward(self.model_, g, X, mode="infer")
        return Z

    def predict(self, X, graph=None):
        return self.predict_proba(X, graph=graph).argmax(axis=1)


class GCNClassifier(BaseGraphClassifier):
    """Plain cross-entropy GCN baseline."""

    _trainer = staticmethod(train_gcn_ce)


class LEGNNClassifier(BaseGraphClassifier):
    """Masked-view label-ensemble classifier with bidirectional loss."""

    _trainer = staticmethod(train_legnn)

    def __init__(self, epochs=200, warmup_epochs=50, learning_rate=0.05,
                 momentum=0.9, weight_decay=5e-4, dropout=0.5, hidden=64,
                 seed=0, mask_rate=0.5, mask_iterations=15,
                 mask_strategy="random", weight_mode="candidate",
                 regather_cooldown=20, use_negative=True):
        super().__init__(epochs, warmup_epochs, learning_rate, momentum,
                         weight_decay, dropout, hidden, seed)
        self.mask_rate = mask_rate
        self.mask_iterations = mask_iterations
        self.mask_strategy = mask_strategy
        self.weight_mode = weight_mode
        self.regather_cooldown = regather_cooldown
        self.use_negative = use_negative


class PropagationClassifier(BaseGraphClassifier):
    """Neighbor-union multi-label baseline."""

    _trainer = staticmethod(train_propagation)

    def __init__(self, epochs=200, warmup_epochs=50, learning_rate=0.05,
                 momentum=0.9, weight_decay=5e-4, dropout=0.5, hidden=64,
                 seed=0, inner_epochs=10):
        super().__init__(epochs, warmup_epochs, learning_rate, momentum,
                         weight_decay, dropout, hidden, seed)
        self.inner_epochs = inner_epochs


class ConfidenceClassifier(BaseGraphClassifier):
    """Confidence-filtered self-training baseline."""

    _trainer = staticmethod(train_confidence)

    def __init__(self, epochs=200, warmup_epochs=50, learning_rate=0.05,
                 momentum=0.9, weight_decay=5e-4, dropout=0.5, hidden=64,
                 seed=0, confidence_threshold=0.99, inner_epochs=10):
        super().__init__(epochs, warmup_epochs, learning_rate, momentum,
                         weight_decay, dropout, hidden, seed)
        self.confidence_threshold = confidence_threshold
        self.inner_epochs = inner_epochs
