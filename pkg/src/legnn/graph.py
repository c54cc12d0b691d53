"""Sparse graph storage, symmetric adjacency normalization, and neighbor masking.

The graph is kept in canonical CSR form with self-loops always present
(structure of A + I).  Masking produces per-node views in which a fraction of
each node's incoming non-self entries is dropped and the remaining entries are
renormalized against the masked degrees.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass
class SparseGraph:
    """Undirected graph with self-loops, canonical CSR.

    Entries within each row are sorted by column index.  ``values`` holds the
    per-edge weights (1.0 after construction, 1/sqrt(d_i d_j) after
    :func:`normalize`).
    """

    num_nodes: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    _csr: sp.csr_matrix | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.row_offsets = np.asarray(self.row_offsets, dtype=np.int64)
        self.col_indices = np.asarray(self.col_indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.row_offsets.shape != (self.num_nodes + 1,):
            raise ValueError("row_offsets must have length num_nodes + 1")
        if self.row_offsets[0] != 0 or self.row_offsets[-1] != len(self.col_indices):
            raise ValueError("row_offsets endpoints inconsistent with col_indices")
        if np.any(np.diff(self.row_offsets) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        if len(self.col_indices) != len(self.values):
            raise ValueError("col_indices and values must have equal length")
        if len(self.col_indices) and (
            self.col_indices.min() < 0 or self.col_indices.max() >= self.num_nodes
        ):
            raise ValueError("column index out of range")

    @property
    def nnz(self) -> int:
        return len(self.col_indices)

    def degrees(self) -> np.ndarray:
        """Per-node stored-entry count (degree of A + I)."""
        return np.diff(self.row_offsets)

    def row_ids(self) -> np.ndarray:
        """Row index of every stored entry, aligned with ``col_indices``."""
        return np.repeat(np.arange(self.num_nodes), self.degrees())

    def to_scipy(self) -> sp.csr_matrix:
        if self._csr is None:
            self._csr = sp.csr_matrix(
                (self.values, self.col_indices, self.row_offsets),
                shape=(self.num_nodes, self.num_nodes),
            )
        return self._csr

    def matmul(self, dense: np.ndarray) -> np.ndarray:
        return self.to_scipy() @ dense

    def matmul_t(self, dense: np.ndarray) -> np.ndarray:
        """Product with the transposed operator (differs only for masked views)."""
        return self.to_scipy().T @ dense

    def entry_lookup(self) -> dict[tuple[int, int], int]:
        """Map (row, col) -> entry position; convenience for tests."""
        rows = self.row_ids()
        return {(int(i), int(j)): k for k, (i, j) in enumerate(zip(rows, self.col_indices))}


@dataclass
class MaskedGraph:
    """One bootstrapped view of a :class:`SparseGraph`.

    ``kept`` flags every directed entry of the base graph; the compacted,
    renormalized view is stored in ``graph``.  Self-loops are always kept.
    """

    base: SparseGraph
    kept: np.ndarray
    graph: SparseGraph

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def row_offsets(self) -> np.ndarray:
        return self.graph.row_offsets

    @property
    def col_indices(self) -> np.ndarray:
        return self.graph.col_indices

    @property
    def values(self) -> np.ndarray:
        return self.graph.values

    def to_scipy(self) -> sp.csr_matrix:
        return self.graph.to_scipy()

    def matmul(self, dense: np.ndarray) -> np.ndarray:
        return self.graph.matmul(dense)

    def matmul_t(self, dense: np.ndarray) -> np.ndarray:
        return self.graph.matmul_t(dense)


GraphLike = SparseGraph | MaskedGraph


def build_graph(edge_list, num_nodes: int) -> SparseGraph:
    """Build canonical CSR of A + I from an undirected edge list.

    Each undirected edge appears once in the input; both directions are stored.
    Duplicate edges are dropped with a warning.  Values are initialized to 1.
    """
    seen = set()
    duplicates = 0
    for src, dst in edge_list:
        src, dst = int(src), int(dst)
        if not (0 <= src < num_nodes and 0 <= dst < num_nodes):
            raise ValueError(f"edge endpoint out of range: ({src}, {dst}) with N={num_nodes}")
        key = (min(src, dst), max(src, dst))
        if key in seen or src == dst:
            duplicates += 1
            continue
        seen.add(key)
    if duplicates:
        warnings.warn(f"dropped {duplicates} duplicate edge(s)", stacklevel=2)

    rows = np.empty(2 * len(seen) + num_nodes, dtype=np.int64)
    cols = np.empty_like(rows)
    k = 0
    for u, v in seen:
        rows[k], cols[k] = u, v
        rows[k + 1], cols[k + 1] = v, u
        k += 2
    rows[k:] = np.arange(num_nodes)
    cols[k:] = np.arange(num_nodes)

    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    np.add.at(offsets, rows + 1, 1)
    offsets = np.cumsum(offsets)
    return SparseGraph(num_nodes, offsets, cols, np.ones(len(cols)))


def normalize(graph: SparseGraph) -> SparseGraph:
    """Symmetric normalization: value(i, j) = 1 / sqrt(d_i * d_j).

    Degrees are the stored-entry counts (self-loops included), so re-running
    on an already-normalized graph is a no-op on values.
    """
    deg = graph.degrees().astype(np.float64)
    vals = 1.0 / np.sqrt(deg[graph.row_ids()] * deg[graph.col_indices])
    return SparseGraph(graph.num_nodes, graph.row_offsets.copy(), graph.col_indices.copy(), vals)


def _compact(base: SparseGraph, kept: np.ndarray) -> MaskedGraph:
    """Build the renormalized CSR view from a kept-entry flag array."""
    kept = np.asarray(kept, dtype=bool)
    counts = np.zeros(base.num_nodes, dtype=np.int64)
    np.add.at(counts, base.row_ids()[kept], 1)
    offsets = np.zeros(base.num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    cols = base.col_indices[kept]
    deg = counts.astype(np.float64)
    rows = np.repeat(np.arange(base.num_nodes), counts)
    vals = 1.0 / np.sqrt(deg[rows] * deg[cols])
    view = SparseGraph(base.num_nodes, offsets, cols, vals)
    return MaskedGraph(base=base, kept=kept, graph=view)


def _mask_counts(base: SparseGraph, fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-row removal counts: round(K * non_self_degree), round-half-up."""
    self_mask = base.row_ids() == base.col_indices
    non_self = np.zeros(base.num_nodes, dtype=np.int64)
    np.add.at(non_self, base.row_ids()[~self_mask], 1)
    m = np.floor(fraction * non_self + 0.5).astype(np.int64)
    return m, self_mask


def _keep_by_key(base: SparseGraph, keys: np.ndarray, m_per_row: np.ndarray) -> np.ndarray:
    """Drop, per row, the m entries with the smallest keys (self-loops last)."""
    rows = base.row_ids()
    order = np.lexsort((keys, rows))
    ranks = np.empty(base.nnz, dtype=np.int64)
    ranks[order] = np.arange(base.nnz) - np.repeat(base.row_offsets[:-1], base.degrees())
    return ranks >= m_per_row[rows]


def mask_random(graph: SparseGraph, fraction: float, rng: np.random.Generator) -> MaskedGraph:
    """Remove round(K * deg) uniformly chosen non-self entries per node.

    Masking is directed: each node drops incoming entries independently, so a
    view may be asymmetric.  Remaining entries are renormalized against the
    masked degrees.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("mask fraction must be in [0, 1)")
    m_per_row, self_mask = _mask_counts(graph, fraction)
    keys = rng.random(graph.nnz)
    keys[self_mask] = np.inf
    kept = _keep_by_key(graph, keys, m_per_row)
    return _compact(graph, kept)


def mask_nearest(graph: SparseGraph, features: np.ndarray, fraction: float) -> MaskedGraph:
    """Remove, per node, the round(K * deg) nearest neighbors in feature space.

    Deterministic; distance ties break toward the lower node index.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] != graph.num_nodes:
        raise ValueError("feature row count must equal num_nodes")
    if not 0.0 <= fraction < 1.0:
        raise ValueError("mask fraction must be in [0, 1)")
    m_per_row, self_mask = _mask_counts(graph, fraction)
    rows = graph.row_ids()
    diff = features[rows] - features[graph.col_indices]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    dist[self_mask] = np.inf
    # lexicographic (distance, col) key keeps the tie-break exact
    order = np.lexsort((graph.col_indices, dist, rows))
    ranks = np.empty(graph.nnz, dtype=np.int64)
    ranks[order] = np.arange(graph.nnz) - np.repeat(graph.row_offsets[:-1], graph.degrees())
    kept = ranks >= m_per_row[rows]
    return _compact(graph, kept)
