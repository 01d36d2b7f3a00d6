"""Compressed sparse row matrices.

`SparseMatrix` is the package's interchange type for adjacency structure
and raw node features.  It stores the classic CSR triple (row offsets,
column indices, values), validates the CSR invariants on construction, and
is immutable afterwards, so instances can be shared freely across
concurrent runs.  Heavy kernels (sparse @ dense) are delegated to
scipy.sparse behind this surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError


@dataclass(frozen=True)
class SparseMatrix:
    """An immutable CSR matrix with float64 values.

    row_offsets has length n_rows + 1, is non-decreasing, and its last
    entry equals len(col_indices).  Column indices are strictly increasing
    within each row.  values and col_indices have equal length.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    _csr: sp.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", np.asarray(self.row_offsets, dtype=np.int64))
        object.__setattr__(self, "col_indices", np.asarray(self.col_indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        self._validate()
        for arr in (self.row_offsets, self.col_indices, self.values):
            arr.setflags(write=False)
        csr = sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets),
            shape=(self.n_rows, self.n_cols),
        )
        object.__setattr__(self, "_csr", csr)

    def _validate(self):
        if self.n_rows < 0 or self.n_cols < 0:
            raise ValidationError("matrix dimensions must be nonnegative")
        if self.row_offsets.shape != (self.n_rows + 1,):
            raise ValidationError(
                f"row_offsets must have length n_rows+1={self.n_rows + 1}, "
                f"got {self.row_offsets.shape}"
            )
        if self.row_offsets[0] != 0 or np.any(np.diff(self.row_offsets) < 0):
            raise ValidationError("row_offsets must start at 0 and be non-decreasing")
        if self.row_offsets[-1] != len(self.col_indices):
            raise ValidationError("last row offset must equal the number of stored entries")
        if len(self.values) != len(self.col_indices):
            raise ValidationError("values and col_indices must have equal length")
        if len(self.col_indices) > 0:
            if self.col_indices.min() < 0 or self.col_indices.max() >= self.n_cols:
                raise ValidationError("column index out of range")
        if len(self.col_indices) > 1:
            # adjacent pairs are in the same row unless the second one starts a row
            deltas = np.diff(self.col_indices)
            same_row = np.ones(len(deltas), dtype=bool)
            starts = self.row_offsets[1:-1]
            starts = starts[(starts > 0) & (starts < len(self.col_indices))]
            same_row[starts - 1] = False
            bad = np.nonzero(same_row & (deltas <= 0))[0]
            if len(bad):
                row = int(np.searchsorted(self.row_offsets, bad[0], side="right") - 1)
                raise ValidationError(f"column indices in row {row} must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("matrix values must be finite")

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, values) -> "SparseMatrix":
        """Build from coordinate triples. Duplicate (row, col) pairs are rejected."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if not (len(rows) == len(cols) == len(values)):
            raise ValidationError("rows, cols, values must have equal length")
        if len(rows) and (rows.min() < 0 or rows.max() >= n_rows):
            raise ValidationError("row index out of range")
        if len(cols) and (cols.min() < 0 or cols.max() >= n_cols):
            raise ValidationError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if len(rows) > 1:
            same = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if np.any(same):
                k = int(np.argmax(same))
                raise ValidationError(f"duplicate entry at ({rows[k]}, {cols[k]})")
        offsets = np.zeros(n_rows + 1, dtype=np.int64)
        np.add.at(offsets, rows + 1, 1)
        np.cumsum(offsets, out=offsets)
        return cls(n_rows, n_cols, offsets, cols, values)

    @classmethod
    def from_dense(cls, dense) -> "SparseMatrix":
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2:
            raise ValidationError("expected a 2-d array")
        rows, cols = np.nonzero(dense)
        return cls.from_coo(dense.shape[0], dense.shape[1], rows, cols, dense[rows, cols])

    @classmethod
    def identity(cls, n) -> "SparseMatrix":
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))

    # ------------------------------------------------------------------
    # queries and kernels

    @property
    def nnz(self) -> int:
        return len(self.values)

    def row(self, i):
        """Column indices and values of row i (views, read-only)."""
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def matmul_dense(self, dense: np.ndarray) -> np.ndarray:
        """self @ dense for a 2-d float64 array."""
        out = self._csr @ np.asarray(dense, dtype=np.float64)
        return np.asarray(out)

    def transpose(self) -> "SparseMatrix":
        t = self._csr.T.tocsr()
        t.sort_indices()
        return SparseMatrix(self.n_cols, self.n_rows, t.indptr, t.indices, t.data)

    def is_symmetric(self) -> bool:
        if self.n_rows != self.n_cols:
            return False
        return (self._csr != self._csr.T).nnz == 0

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )
