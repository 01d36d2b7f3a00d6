"""Adjacency normalization, degrees, and PageRank.

The propagation operator used by the convolutional layers is the
symmetrically normalized adjacency with self-connections,
``D̃^{-1/2} (A + I) D̃^{-1/2}`` with ``D̃ = D + I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, ValidationError
from .sparse import SparseMatrix


@dataclass(frozen=True)
class NormalizedAdjacency:
    """The symmetric propagation operator of a graph.

    Entrywise, ``matrix[i, j] = (A + I)[i, j] / sqrt(d̃_i * d̃_j)`` where
    d̃ counts neighbors plus the self-connection.  Every diagonal entry is
    positive.
    """

    matrix: SparseMatrix

    @property
    def n(self) -> int:
        return self.matrix.n_rows


def _check_adjacency(adjacency: SparseMatrix):
    if adjacency.n_rows != adjacency.n_cols:
        raise ValidationError("adjacency must be square")
    if not adjacency.is_symmetric():
        raise ValidationError("adjacency must be symmetric")
    if np.any(adjacency.diagonal() != 0):
        raise ValidationError("adjacency must have a zero diagonal (no self-loops)")
    if adjacency.nnz and not np.all(adjacency.values == 1.0):
        raise ValidationError("adjacency must be binary")


def node_degrees(adjacency: SparseMatrix) -> np.ndarray:
    """Number of neighbors of each node, self-loops excluded."""
    _check_adjacency(adjacency)
    return np.diff(adjacency.row_offsets).astype(np.int64)


def normalize_adjacency(adjacency: SparseMatrix) -> NormalizedAdjacency:
    """Symmetrically normalize a binary adjacency with added self-connections.

    The sparsity pattern of the result is the input pattern plus the full
    diagonal.
    """
    _check_adjacency(adjacency)
    n = adjacency.n_rows
    deg_tilde = np.diff(adjacency.row_offsets) + 1.0
    inv_sqrt = 1.0 / np.sqrt(deg_tilde)

    # splice the self-connection into each CSR row, keeping columns sorted
    rows = []
    cols = []
    vals = []
    for i in range(n):
        row_cols, _ = adjacency.row(i)
        pos = int(np.searchsorted(row_cols, i))
        merged = np.concatenate([row_cols[:pos], [i], row_cols[pos:]])
        rows.append(np.full(len(merged), i, dtype=np.int64))
        cols.append(merged)
        vals.append(inv_sqrt[i] * inv_sqrt[merged])
    matrix = SparseMatrix.from_coo(
        n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )
    return NormalizedAdjacency(matrix)


def pagerank(
    adjacency: SparseMatrix,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> np.ndarray:
    """Stationary visit probabilities of the damped random walk.

    The walk treats every edge as traversable in both directions and
    teleports to a uniformly random node with probability ``1 - damping``.
    Nodes without neighbors spread their mass uniformly.  Raises
    :class:`NonConvergenceError` (carrying the last iterate) if the L1
    change between sweeps does not drop below ``tol`` within ``max_iter``
    iterations.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    _check_adjacency(adjacency)
    n = adjacency.n_rows
    if n == 0:
        return np.zeros(0)
    deg = np.diff(adjacency.row_offsets).astype(np.float64)
    dangling = deg == 0
    safe_deg = np.where(dangling, 1.0, deg)

    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        outflow = np.where(dangling, 0.0, p / safe_deg)
        walked = adjacency.matmul_dense(outflow[:, None])[:, 0]
        dangling_mass = p[dangling].sum()
        p_next = (1.0 - damping) / n + damping * (walked + dangling_mass / n)
        if np.abs(p_next - p).sum() < tol:
            return p_next
        p = p_next
    raise NonConvergenceError(
        f"pagerank did not converge within {max_iter} iterations", last_iterate=p
    )
