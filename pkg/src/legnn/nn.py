"""Two-layer GCN forward/backward, cross-entropy, and SGD with momentum.

Everything is double precision and deterministic for a fixed seed.  The
backward pass is the exact analytic gradient of the forward computation,
including the dropout mask drawn during training-mode forwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import GraphLike

_LOG_CLAMP = 1e-12


@dataclass
class GcnModel:
    """Weights, momentum buffers, and hyperparameters of the 2-layer GCN."""

    W1: np.ndarray
    W2: np.ndarray
    vel_W1: np.ndarray
    vel_W2: np.ndarray
    dropout: float = 0.5
    learning_rate: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 5e-4

    @classmethod
    def initialize(
        cls,
        num_features: int,
        hidden: int,
        num_classes: int,
        rng: np.random.Generator,
        *,
        dropout: float = 0.5,
        learning_rate: float = 0.05,
        momentum: float = 0.9,
        weight_decay: float = 5e-4,
    ) -> "GcnModel":
        """Glorot-uniform weights, zero momentum buffers."""

        def glorot(fan_in, fan_out):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-limit, limit, size=(fan_in, fan_out))

        return cls(
            W1=glorot(num_features, hidden),
            W2=glorot(hidden, num_classes),
            vel_W1=np.zeros((num_features, hidden)),
            vel_W2=np.zeros((hidden, num_classes)),
            dropout=dropout,
            learning_rate=learning_rate,
            momentum=momentum,
            weight_decay=weight_decay,
        )

    @property
    def num_classes(self) -> int:
        return self.W2.shape[1]

    def copy(self) -> "GcnModel":
        return GcnModel(
            W1=self.W1.copy(),
            W2=self.W2.copy(),
            vel_W1=self.vel_W1.copy(),
            vel_W2=self.vel_W2.copy(),
            dropout=self.dropout,
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
        )


@dataclass
class ForwardCache:
    """Intermediates of one forward pass, consumed by :func:`gcn_backward`."""

    graph: GraphLike
    X: np.ndarray
    A1: np.ndarray              # pre-activation of layer 1
    H1d: np.ndarray             # post-ReLU, post-dropout hidden
    Z: np.ndarray
    W2: np.ndarray
    drop_mask: np.ndarray | None


@dataclass
class Gradients:
    dW1: np.ndarray
    dW2: np.ndarray


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def gcn_forward(
    model: GcnModel,
    graph: GraphLike,
    X: np.ndarray,
    mode: str = "train",
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Z = softmax(A_hat @ dropout(relu(A_hat @ X @ W1)) @ W2), row-wise.

    ``mode`` is "train" (dropout active, needs ``rng``) or "infer".
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"unknown mode: {mode!r}")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != graph.num_nodes:
        raise ValueError(f"feature matrix must be N x d with N={graph.num_nodes}")
    if X.shape[1] != model.W1.shape[0]:
        raise ValueError(
            f"feature dim {X.shape[1]} does not match W1 rows {model.W1.shape[0]}"
        )

    A1 = graph.matmul(X @ model.W1)
    H1 = np.maximum(A1, 0.0)
    drop_mask = None
    if mode == "train" and model.dropout > 0.0:
        if rng is None:
            raise ValueError("training-mode forward requires an rng for dropout")
        keep = 1.0 - model.dropout
        drop_mask = (rng.random(H1.shape) < keep) / keep
        H1d = H1 * drop_mask
    else:
        H1d = H1
    logits = graph.matmul(H1d @ model.W2)
    Z = softmax_rows(logits)
    if not np.all(np.isfinite(Z)):
        raise FloatingPointError("non-finite values in GCN forward output")
    return Z, ForwardCache(graph=graph, X=X, A1=A1, H1d=H1d, Z=Z, W2=model.W2, drop_mask=drop_mask)


def gcn_backward(cache: ForwardCache, dZ: np.ndarray) -> Gradients:
    """Exact gradients of the upstream loss w.r.t. W1 and W2.

    ``dZ`` is the gradient with respect to the softmax output Z.
    """
    Z = cache.Z
    if dZ.shape != Z.shape:
        raise ValueError(f"dZ shape {dZ.shape} does not match Z shape {Z.shape}")
    # softmax Jacobian
    dLogits = Z * (dZ - np.sum(dZ * Z, axis=1, keepdims=True))
    dT2 = cache.graph.matmul_t(dLogits)
    dW2 = cache.H1d.T @ dT2
    dH1d = dT2 @ cache.W2.T
    if cache.drop_mask is not None:
        dH1 = dH1d * cache.drop_mask
    else:
        dH1 = dH1d
    dA1 = dH1 * (cache.A1 > 0.0)
    dT1 = cache.graph.matmul_t(dA1)
    dW1 = cache.X.T @ dT1
    return Gradients(dW1=dW1, dW2=dW2)


def sgd_step(model: GcnModel, grads: Gradients) -> GcnModel:
    """In-place momentum SGD: v <- m*v + g + wd*W; W <- W - lr*v."""
    for W, v, g in ((model.W1, model.vel_W1, grads.dW1), (model.W2, model.vel_W2, grads.dW2)):
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient in sgd_step")
        v *= model.momentum
        v += g + model.weight_decay * W
        W -= model.learning_rate * v
        if not np.all(np.isfinite(W)):
            raise FloatingPointError("non-finite weights after sgd_step")
    return model


def cross_entropy(
    Z: np.ndarray, labels: np.ndarray, index_set: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean negative log-probability of the given classes over ``index_set``.

    Returns the scalar loss and its gradient w.r.t. Z (zero off the index set).
    Probabilities are clamped at 1e-12 before the log.
    """
    index_set = np.asarray(index_set, dtype=np.int64)
    if index_set.size == 0:
        raise ValueError("cross_entropy requires a nonempty index set")
    labels = np.asarray(labels, dtype=np.int64)
    y = labels[index_set]
    if y.min() < 0 or y.max() >= Z.shape[1]:
        raise ValueError("label out of range on index set")
    p = Z[index_set, y]
    pc = np.maximum(p, _LOG_CLAMP)
    loss = float(np.mean(-np.log(pc)))
    dZ = np.zeros_like(Z)
    grad = np.where(p >= _LOG_CLAMP, -1.0 / pc, 0.0) / index_set.size
    np.add.at(dZ, (index_set, y), grad)
    return loss, dZ
