"""Classification accuracy and gathered-label quality metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LabelQuality:
    precision: float
    recall: float
    f1: float
    coverage: float


def accuracy(predictions: np.ndarray, clean: np.ndarray, index_set: np.ndarray) -> float:
    index_set = np.asarray(index_set, dtype=np.int64)
    if index_set.size == 0:
        raise ValueError("accuracy requires a nonempty index set")
    predictions = np.asarray(predictions)
    clean = np.asarray(clean)
    return float(np.mean(predictions[index_set] == clean[index_set]))


def multilabel_prf(yp: np.ndarray, clean: np.ndarray, index_set: np.ndarray) -> LabelQuality:
    """Each set bit counts as an independent label.

    TP are bits matching the clean label; precision = TP / total set bits,
    recall = fraction of nodes whose clean label is covered.
    """
    index_set = np.asarray(index_set, dtype=np.int64)
    if index_set.size == 0:
        raise ValueError("multilabel_prf requires a nonempty index set")
    yp = np.asarray(yp, dtype=bool)[index_set]
    clean = np.asarray(clean, dtype=np.int64)[index_set]
    total_bits = int(yp.sum())
    if total_bits == 0:
        raise ValueError("candidate matrix has no set bits on the index set")
    tp = int(yp[np.arange(index_set.size), clean].sum())
    precision = tp / total_bits
    recall = tp / index_set.size
    f1 = 0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
    return LabelQuality(precision=precision, recall=recall, f1=f1, coverage=recall)


def clean_coverage(yp: np.ndarray, clean: np.ndarray, index_set: np.ndarray) -> float:
    """Fraction of indexed nodes whose clean label's bit is set (== recall)."""
    index_set = np.asarray(index_set, dtype=np.int64)
    if index_set.size == 0:
        raise ValueError("clean_coverage requires a nonempty index set")
    yp = np.asarray(yp, dtype=bool)[index_set]
    clean = np.asarray(clean, dtype=np.int64)[index_set]
    return float(np.mean(yp[np.arange(index_set.size), clean]))
