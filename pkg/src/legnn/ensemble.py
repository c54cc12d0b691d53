"""Masked-view bootstrapping and symmetric high/low-probability label ensembling.

A snapshot freezes the candidate matrices together with their confidence
weights; trainers keep using the frozen weights until the next gathering
event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import MaskedGraph, SparseGraph, mask_random
from .nn import GcnModel, gcn_forward
from .nn import softmax_rows as _softmax_rows


@dataclass
class EnsembleSnapshot:
    """Frozen candidate sets and loss weights from one gathering event.

    ``yp``/``yn`` are boolean N x C matrices: the union over views of per-node
    argmax (high-probability) and argmin (low-probability) predictions.
    ``pos_weights`` and ``neg_weights`` are the frozen confidence weights over
    the respective candidate sets (zero off-candidates).
    """

    yp: np.ndarray
    yn: np.ndarray
    pos_weights: np.ndarray
    neg_weights: np.ndarray
    source_epoch: int = 0


def bootstrap_views(
    graph: SparseGraph, fraction: float, num_views: int, seed: int
) -> list[MaskedGraph]:
    """num_views independently masked graph views, one stream per view."""
    if num_views < 1:
        raise ValueError("need at least one view")
    return [
        mask_random(graph, fraction, np.random.default_rng(np.random.SeedSequence([seed, i])))
        for i in range(num_views)
    ]


def candidate_weights(Z: np.ndarray, candidates: np.ndarray, mode: str = "candidate") -> np.ndarray:
    """Confidence weights over a boolean candidate matrix.

    "candidate" normalizes each row over its candidate set so the weights sum
    to 1 per row; "literal" uses the raw probabilities on candidates.
    """
    masked = Z * candidates
    if mode == "candidate":
        denom = masked.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            w = np.where(denom > 0.0, masked / denom, 0.0)
        return w
    if mode == "literal":
        return masked
    raise ValueError(f"unknown weight mode: {mode!r}")


def make_snapshot(
    Z_ref: np.ndarray,
    yp: np.ndarray,
    yn: np.ndarray,
    weight_mode: str = "candidate",
    source_epoch: int = 0,
) -> EnsembleSnapshot:
    """Freeze weights for both candidate sides from a reference prediction."""
    return EnsembleSnapshot(
        yp=yp.astype(bool),
        yn=yn.astype(bool),
        pos_weights=candidate_weights(Z_ref, yp, weight_mode),
        neg_weights=candidate_weights(1.0 - Z_ref, yn, weight_mode),
        source_epoch=source_epoch,
    )


def gather_labels(
    model: GcnModel,
    views: list[MaskedGraph],
    X: np.ndarray,
    weight_mode: str = "candidate",
    source_epoch: int = 0,
) -> EnsembleSnapshot:
    """Run inference on every view and assemble the candidate matrices.

    A class bit is set in yp (yn) if it is the argmax (argmin) of some view's
    prediction row; ties break toward the lowest class index.  Weights are
    computed from the prediction on the unmasked base graph and frozen.
    """
    if not views:
        raise ValueError("need at least one view")
    N, C = views[0].num_nodes, model.num_classes
    yp = np.zeros((N, C), dtype=bool)
    yn = np.zeros((N, C), dtype=bool)
    rows = np.arange(N)
    # X @ W1 is view-independent; hoisting it out of the loop keeps each view
    # at two sparse products (bitwise identical to a per-view forward pass)
    T1 = np.asarray(X, dtype=np.float64) @ model.W1
    for view in views:
        H1 = np.maximum(view.matmul(T1), 0.0)
        Z = _softmax_rows(view.matmul(H1 @ model.W2))
        yp[rows, Z.argmax(axis=1)] = True
        yn[rows, Z.argmin(axis=1)] = True
    Z_ref, _ = gcn_forward(model, views[0].base, X, mode="infer")
    return make_snapshot(Z_ref, yp, yn, weight_mode, source_epoch)


def voting_error_rate(p: int, alpha: float) -> float:
    """Probability that a majority of p noisy votes is wrong.

    Binomial tail sum from ceil(p/2): for odd p a strict majority of errors;
    for even p ties count as errors (which can exceed alpha).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    start = -(-p // 2)
    return float(
        sum(math.comb(p, j) * alpha**j * (1.0 - alpha) ** (p - j) for j in range(start, p + 1))
    )
