"""Compressed-sparse-row containers for the reservoir weights.

The recurrent matrix stores structure only (every stored entry is 1); the
input matrix additionally stores a real value per entry. Arrays are made
read-only on construction so a generated reservoir cannot be mutated in
place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _check_structure(n_rows, n_cols, row_offsets, col_indices):
    if n_rows < 0 or n_cols < 0:
        raise DimensionError(f"negative matrix size {n_rows}x{n_cols}")
    if row_offsets.ndim != 1 or row_offsets.shape[0] != n_rows + 1:
        raise DimensionError(f"row_offsets must have length {n_rows + 1}, got {row_offsets.shape[0]}")
    if row_offsets[0] != 0:
        raise DimensionError("row_offsets[0] must be 0")
    if np.any(np.diff(row_offsets) < 0):
        raise DimensionError("row_offsets must be non-decreasing")
    if col_indices.ndim != 1 or col_indices.shape[0] != row_offsets[-1]:
        raise DimensionError(
            f"col_indices must have length row_offsets[-1]={row_offsets[-1]}, got {col_indices.shape[0]}"
        )
    if col_indices.size and (col_indices.min() < 0 or col_indices.max() >= n_cols):
        raise DimensionError(f"column index out of range [0, {n_cols})")
    for i in range(n_rows):
        row = col_indices[row_offsets[i]:row_offsets[i + 1]]
        if np.unique(row).size != row.size:
            raise DimensionError(f"duplicate column index in row {i}")


@dataclass(frozen=True, eq=False)
class SparseBinaryMatrix:
    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", _frozen(self.row_offsets, np.int64))
        object.__setattr__(self, "col_indices", _frozen(self.col_indices, np.int64))
        _check_structure(self.n_rows, self.n_cols, self.row_offsets, self.col_indices)

    @classmethod
    def from_rows(cls, n_cols, rows) -> SparseBinaryMatrix:
        rows = [np.asarray(r, dtype=np.int64) for r in rows]
        offsets = np.zeros(len(rows) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([r.size for r in rows])
        cols = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        return cls(len(rows), n_cols, offsets, cols)

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    def row(self, i) -> np.ndarray:
        return self.col_indices[self.row_offsets[i]:self.row_offsets[i + 1]]

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows), self.row_lengths())
        dense[rows, self.col_indices] = 1.0
        return dense

    def __eq__(self, other):
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
        )


@dataclass(frozen=True, eq=False)
class SparseRealMatrix:
    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", _frozen(self.row_offsets, np.int64))
        object.__setattr__(self, "col_indices", _frozen(self.col_indices, np.int64))
        object.__setattr__(self, "values", _frozen(self.values, np.float64))
        _check_structure(self.n_rows, self.n_cols, self.row_offsets, self.col_indices)
        if self.values.shape != self.col_indices.shape:
            raise DimensionError(
                f"values must match col_indices length {self.col_indices.shape[0]}, got {self.values.shape[0]}"
            )
        if not np.all(np.isfinite(self.values)) or np.any(self.values == 0):
            raise DimensionError("stored values must be finite and nonzero")

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    def row(self, i):
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows), self.row_lengths())
        dense[rows, self.col_indices] = self.values
        return dense

    def __eq__(self, other):
        if not isinstance(other, SparseRealMatrix):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )
