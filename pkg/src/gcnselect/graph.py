"""Immutable undirected graphs in CSR form and the sparse operators built on them.

Two operators matter downstream:

* ``normalized_adjacency``: ``D~^-1/2 (A + I) D~^-1/2``, the GCN propagation matrix.
* ``normalized_laplacian``: ``D^-1/2 (D - A) D^-1/2`` without self-loops; rows and
  columns of isolated nodes are left empty (all zero).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DataError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph; ``col_indices[row_offsets[i]:row_offsets[i+1]]``
    are the neighbours of ``i`` in ascending order."""

    num_nodes: int
    row_offsets: np.ndarray
    col_indices: np.ndarray

    @cached_property
    def degrees(self) -> np.ndarray:
        return _frozen(np.diff(self.row_offsets))

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return int(self.col_indices.size // 2)

    def neighbors(self, node: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[node] : self.row_offsets[node + 1]]

    def neighbors_of(self, nodes: np.ndarray) -> np.ndarray:
        """Concatenated neighbour lists of ``nodes`` (with repeats)."""
        starts = self.row_offsets[nodes]
        lens = self.row_offsets[nodes + 1] - starts
        total = int(lens.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        shift = np.repeat(starts - (np.cumsum(lens) - lens), lens)
        return self.col_indices[np.arange(total) + shift]

    def edges(self) -> np.ndarray:
        """Undirected edges as an ``(m, 2)`` array with ``u < v``, sorted."""
        rows = np.repeat(np.arange(self.num_nodes), self.degrees)
        keep = rows < self.col_indices
        return np.column_stack([rows[keep], self.col_indices[keep]])

    def permuted(self, perm: np.ndarray) -> "Graph":
        """Relabel node ``i`` as ``perm[i]``."""
        perm = np.asarray(perm)
        return build_graph(perm[self.edges()], self.num_nodes)


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Real CSR matrix, float64 values."""

    num_rows: int
    num_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    @cached_property
    def _csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets),
            shape=(self.num_rows, self.num_cols),
        )

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def max_asymmetry(self) -> float:
        diff = self._csr - self._csr.T
        return float(abs(diff).max()) if diff.nnz else 0.0

    @classmethod
    def from_coo(cls, rows, cols, values, shape: tuple[int, int]) -> "SparseMatrix":
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], np.asarray(values, dtype=np.float64)[order]
        offsets = np.zeros(shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=shape[0]), out=offsets[1:])
        return cls(
            shape[0],
            shape[1],
            _frozen(offsets),
            _frozen(cols.astype(np.int64)),
            _frozen(values),
        )

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        idx = np.arange(n)
        return cls.from_coo(idx, idx, np.ones(n), (n, n))


def build_graph(edge_list, num_nodes: int) -> Graph:
    """Build an undirected simple graph from node-index pairs.

    Duplicates and self-loops are dropped; every remaining pair is stored in
    both directions. Raises ``DataError`` naming the first out-of-range edge.
    """
    if num_nodes < 0:
        raise DataError(f"num_nodes must be non-negative, got {num_nodes}")
    edges = np.asarray(edge_list, dtype=np.int64).reshape(-1, 2)
    bad = np.flatnonzero(((edges < 0) | (edges >= num_nodes)).any(axis=1))
    if bad.size:
        u, v = edges[bad[0]]
        raise DataError(
            f"edge #{bad[0]} ({u}, {v}) has an endpoint outside [0, {num_nodes})"
        )
    edges = edges[edges[:, 0] != edges[:, 1]]
    both = np.concatenate([edges, edges[:, ::-1]])
    keys = np.unique(both[:, 0] * num_nodes + both[:, 1])
    rows, cols = keys // max(num_nodes, 1), keys % max(num_nodes, 1)
    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=num_nodes), out=offsets[1:])
    return Graph(num_nodes, _frozen(offsets), _frozen(cols.astype(np.int64)))


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    component_id: np.ndarray
    num_components: int


def connected_components(g: Graph) -> ComponentLabeling:
    """Label components by BFS; ids follow the lowest node index in each component."""
    comp = np.full(g.num_nodes, -1, dtype=np.int64)
    count = 0
    for start in range(g.num_nodes):
        if comp[start] >= 0:
            continue
        comp[start] = count
        frontier = np.array([start])
        while frontier.size:
            nbrs = g.neighbors_of(frontier)
            nbrs = np.unique(nbrs[comp[nbrs] < 0])
            comp[nbrs] = count
            frontier = nbrs
        count += 1
    return ComponentLabeling(_frozen(comp), count)


def _edge_coo(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    return np.repeat(np.arange(g.num_nodes), g.degrees), np.asarray(g.col_indices)


def normalized_adjacency(g: Graph) -> SparseMatrix:
    """``D~^-1/2 (A + I) D~^-1/2`` with ``D~ = D + I``."""
    rows, cols = _edge_coo(g)
    diag = np.arange(g.num_nodes)
    rows = np.concatenate([rows, diag])
    cols = np.concatenate([cols, diag])
    deg = g.degrees.astype(np.float64) + 1.0
    return SparseMatrix.from_coo(
        rows, cols, 1.0 / np.sqrt(deg[rows] * deg[cols]), (g.num_nodes, g.num_nodes)
    )


def normalized_laplacian(g: Graph) -> SparseMatrix:
    """``D^-1/2 (D - A) D^-1/2``; isolated nodes get an all-zero row and column."""
    rows, cols = _edge_coo(g)
    deg = g.degrees.astype(np.float64)
    diag = np.flatnonzero(deg > 0)
    # edges only touch nodes with degree >= 1, so the product is positive
    vals = np.concatenate([-1.0 / np.sqrt(deg[rows] * deg[cols]), np.ones(diag.size)])
    return SparseMatrix.from_coo(
        np.concatenate([rows, diag]),
        np.concatenate([cols, diag]),
        vals,
        (g.num_nodes, g.num_nodes),
    )


def spmm(m: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """CSR times dense, float64."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != m.num_cols:
        raise ValueError(
            f"dimension mismatch: matrix has {m.num_cols} columns, operand has {x.shape[0]} rows"
        )
    return np.asarray(m._csr @ x)
