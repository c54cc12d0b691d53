"""Synthetic label noise: transition matrices and label corruption."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNLABELED = -1


@dataclass(frozen=True)
class NoiseSpec:
    """Noise kind ("symmetric" or "pair"), rate tau, and class count."""

    kind: str
    tau: float
    num_classes: int

    def __post_init__(self):
        if self.kind not in ("symmetric", "pair"):
            raise ValueError(f"unknown noise kind: {self.kind!r}")
        if not 0.0 <= self.tau < 1.0:
            raise ValueError("tau must be in [0, 1)")
        if self.num_classes < 2:
            raise ValueError("need at least 2 classes")


def build_transition(spec: NoiseSpec) -> np.ndarray:
    """Row-stochastic C x C transition matrix for the given noise spec.

    symmetric: 1 - tau on the diagonal, tau / (C - 1) elsewhere.
    pair: 1 - tau on the diagonal, tau at (i, (i + 1) mod C).
    """
    C, tau = spec.num_classes, spec.tau
    if spec.kind == "symmetric":
        T = np.full((C, C), tau / (C - 1))
        np.fill_diagonal(T, 1.0 - tau)
    else:
        T = np.zeros((C, C))
        np.fill_diagonal(T, 1.0 - tau)
        T[np.arange(C), (np.arange(C) + 1) % C] = tau
    return T


def flip_labels(labels: np.ndarray, T: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Resample each labeled entry from its row of T; -1 entries untouched."""
    T = np.asarray(T, dtype=np.float64)
    if not np.allclose(T.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("transition matrix must be row-stochastic")
    labels = np.asarray(labels, dtype=np.int64)
    out = labels.copy()
    labeled = np.flatnonzero(labels != UNLABELED)
    if labeled.size == 0:
        return out
    cdf = np.cumsum(T, axis=1)
    u = rng.random(labeled.size)
    out[labeled] = np.argmax(u[:, None] < cdf[labels[labeled]], axis=1)
    return out
