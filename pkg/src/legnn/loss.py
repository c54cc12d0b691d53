"""Weighted positive/negative candidate losses and their combination.

The positive term is a weighted negative log-probability over the
high-probability candidate set; the negative term is the same construction
applied to (1 - Z) over the low-probability set.  Weights come frozen from
the snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import EnsembleSnapshot

_LOG_CLAMP = 1e-12


@dataclass
class LossReport:
    total: float
    positive: float
    negative: float
    dZ: np.ndarray


def _weighted_nll(P: np.ndarray, weights: np.ndarray) -> tuple[float, np.ndarray]:
    """(1/N) * sum_ij w_ij * -log(max(P_ij, eps)) and its gradient w.r.t. P."""
    N = P.shape[0]
    if N == 0:
        raise ValueError("empty prediction matrix")
    Pc = np.maximum(P, _LOG_CLAMP)
    loss = float(np.sum(weights * -np.log(Pc)) / N)
    dP = np.where((weights != 0.0) & (P >= _LOG_CLAMP), -weights / Pc, 0.0) / N
    return loss, dP


def positive_loss(Z: np.ndarray, snapshot: EnsembleSnapshot) -> tuple[float, np.ndarray]:
    """Weighted loss over high-probability candidates; returns (loss, dZ)."""
    return _weighted_nll(Z, snapshot.pos_weights)


def negative_loss(Z: np.ndarray, snapshot: EnsembleSnapshot) -> tuple[float, np.ndarray]:
    """Mirrored loss on (1 - Z) over low-probability candidates."""
    loss, dP = _weighted_nll(1.0 - Z, snapshot.neg_weights)
    return loss, -dP


def bidirectional_loss(
    Z: np.ndarray, snapshot: EnsembleSnapshot, use_negative: bool = True
) -> LossReport:
    """Sum of the positive and negative terms with combined gradient."""
    pos, dpos = positive_loss(Z, snapshot)
    if use_negative:
        neg, dneg = negative_loss(Z, snapshot)
    else:
        neg, dneg = 0.0, np.zeros_like(dpos)
    return LossReport(total=pos + neg, positive=pos, negative=neg, dZ=dpos + dneg)
