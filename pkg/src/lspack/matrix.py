"""Sparse/dense matrix storage, nnz2-aware kernels and synthetic generators.

Matrices are row-compressed and immutable after construction; dense
matrices are plain row-major float64 ``numpy.ndarray``s.  The two hot
kernels (the Gram matrix and the squared row norms of a product) cost
O(nnz2(A)), where nnz2 is the sum of squared per-row nonzero counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from ._kernels import csr_gram_upper, csr_matvec, csr_rmatvec, csr_row_norms_direct, csr_row_norms_gram
from .errors import FormatError
from .rng import ROLE_GENERATOR, substream


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable CSR matrix.

    Invariants enforced on construction: monotone row offsets covering all
    stored entries, strictly increasing in-range column indices within each
    row, and no explicitly stored zeros.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", np.ascontiguousarray(self.row_offsets, dtype=np.int64))
        object.__setattr__(self, "col_indices", np.ascontiguousarray(self.col_indices, dtype=np.int64))
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.float64))
        self._validate()

    def _validate(self) -> None:
        off, cols, vals = self.row_offsets, self.col_indices, self.values
        if self.n_rows < 0 or self.n_cols < 0:
            raise FormatError("negative matrix dimension")
        if off.shape != (self.n_rows + 1,):
            raise FormatError("row_offsets must have length n_rows + 1")
        if off[0] != 0 or off[-1] != cols.size or cols.size != vals.size:
            raise FormatError("row_offsets do not cover the stored entries")
        if np.any(np.diff(off) < 0):
            raise FormatError("row_offsets must be non-decreasing")
        if cols.size:
            if cols.min() < 0 or cols.max() >= self.n_cols:
                raise FormatError("column index out of range")
            inc = np.diff(cols) > 0
            # positions where a new row starts are exempt from the ordering check
            boundary = np.zeros(cols.size - 1, dtype=bool) if cols.size > 1 else np.zeros(0, dtype=bool)
            starts = off[1:-1]
            boundary[starts[(starts > 0) & (starts < cols.size)] - 1] = True
            if not np.all(inc | boundary):
                raise FormatError("column indices must be strictly increasing within each row")
            if np.any(vals == 0.0) or not np.all(np.isfinite(vals)):
                raise FormatError("explicit zeros or non-finite values are not allowed")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_coo(cls, n_rows: int, n_cols: int, rows, cols, vals) -> "SparseMatrix":
        """Build from triplets; duplicates are summed, zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size:
            if rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols:
                raise FormatError("coordinate entry out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            key_new = np.empty(rows.size, dtype=bool)
            key_new[0] = True
            key_new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            group = np.cumsum(key_new) - 1
            summed = np.zeros(group[-1] + 1)
            np.add.at(summed, group, vals)
            rows, cols, vals = rows[key_new], cols[key_new], summed
            keep = vals != 0.0
            rows, cols, vals = rows[keep], cols[keep], vals[keep]
        offsets = np.zeros(n_rows + 1, dtype=np.int64)
        np.add.at(offsets, rows + 1, 1)
        np.cumsum(offsets, out=offsets)
        return cls(n_rows, n_cols, offsets, cols, vals)

    @classmethod
    def from_dense(cls, arr) -> "SparseMatrix":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise FormatError("dense input must be 2-D")
        rows, cols = np.nonzero(arr)
        return cls.from_coo(arr.shape[0], arr.shape[1], rows, cols, arr[rows, cols])

    # -- basic queries ------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows), self.row_nnz())
        out[rows, self.col_indices] = self.values
        return out

    def transpose(self) -> "SparseMatrix":
        rows = np.repeat(np.arange(self.n_rows), self.row_nnz())
        return SparseMatrix.from_coo(self.n_cols, self.n_rows, self.col_indices, rows, self.values)

    # -- linear operators ---------------------------------------------

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.n_cols,):
            raise ValueError("matvec dimension mismatch")
        return csr_matvec(self.row_offsets, self.col_indices, self.values, self.n_rows, x)

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        y = np.ascontiguousarray(y, dtype=np.float64)
        if y.shape != (self.n_rows,):
            raise ValueError("rmatvec dimension mismatch")
        nblocks = config.worker_blocks(self.n_rows)
        return csr_rmatvec(self.row_offsets, self.col_indices, self.values,
                           self.n_rows, self.n_cols, y, nblocks)


@dataclass(frozen=True)
class SpectrumSpec:
    """Prescribed non-increasing positive singular values."""

    singular_values: tuple = field(default=())

    def __post_init__(self):
        sv = tuple(float(s) for s in self.singular_values)
        object.__setattr__(self, "singular_values", sv)
        arr = np.asarray(sv)
        if arr.size == 0:
            raise ValueError("spectrum must be non-empty")
        if np.any(arr <= 0):
            raise ValueError("singular values must be strictly positive")
        if np.any(np.diff(arr) > 0):
            raise ValueError("singular values must be sorted non-increasing")

    def __len__(self) -> int:
        return len(self.singular_values)

    @property
    def cond(self) -> float:
        sv = self.singular_values
        return sv[0] / sv[-1]


def nnz2(A: SparseMatrix) -> int:
    """Sum over rows of the squared per-row nonzero count."""
    counts = A.row_nnz()
    return int(np.dot(counts, counts))


def gram(A: SparseMatrix) -> np.ndarray:
    """A^T A in O(nnz2(A)), exactly symmetric.

    Accumulates each row's rank-1 outer product restricted to the row's
    nonzero pattern; only the upper triangle is computed and then mirrored
    so the result is symmetric to the bit.
    """
    nblocks = config.worker_blocks(A.n_rows)
    upper = csr_gram_upper(A.row_offsets, A.col_indices, A.values, A.n_rows, A.n_cols, nblocks)
    return upper + np.triu(upper, 1).T


def product_row_norms(A: SparseMatrix, B: np.ndarray, force_path: str | None = None) -> np.ndarray:
    """Squared Euclidean norms of the rows of A @ B.

    Chooses between the direct per-row product, at nnz(A) * r operations,
    and the precomputed B B^T quadratic-pattern sum, at nnz2(A) + d^2 * r;
    ties go to the B B^T path.  ``force_path`` ("direct" or "gram") pins
    the strategy for testing.
    """
    B = np.ascontiguousarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != A.n_cols:
        raise ValueError(f"B must have {A.n_cols} rows, got shape {B.shape}")
    r = B.shape[1]
    if force_path is None:
        cost_direct = A.nnz * r
        cost_gram = nnz2(A) + A.n_cols * A.n_cols * r
        path = "direct" if cost_direct < cost_gram else "gram"
    elif force_path in ("direct", "gram"):
        path = force_path
    else:
        raise ValueError("force_path must be 'direct' or 'gram'")
    if path == "direct":
        return csr_row_norms_direct(A.row_offsets, A.col_indices, A.values, A.n_rows, B)
    C = B @ B.T
    return csr_row_norms_gram(A.row_offsets, A.col_indices, A.values, A.n_rows, C)


def select_columns(A: SparseMatrix, K) -> SparseMatrix:
    """Column submatrix A[:, K] with columns in K's order."""
    K = np.asarray(K, dtype=np.int64)
    if K.size:
        if K.min() < 0 or K.max() >= A.n_cols:
            raise ValueError("column index out of range")
        if np.unique(K).size != K.size:
            raise ValueError("duplicate column index")
    newpos = np.full(A.n_cols, -1, dtype=np.int64)
    newpos[K] = np.arange(K.size)
    keep = newpos[A.col_indices] >= 0
    rows = np.repeat(np.arange(A.n_rows), A.row_nnz())[keep]
    cols = newpos[A.col_indices[keep]]
    return SparseMatrix.from_coo(A.n_rows, int(K.size), rows, cols, A.values[keep])


def generate_fixed_spectrum(n: int, d: int, spec: SpectrumSpec, seed: int) -> np.ndarray:
    """Dense n x d matrix with the prescribed singular values.

    Orthonormal factors come from thin QR of seeded standard-normal
    matrices, so the output is a deterministic function of (n, d, spec,
    seed).
    """
    k = len(spec)
    if not (k <= d <= n):
        raise ValueError(f"need len(spec) <= d <= n, got {k}, {d}, {n}")
    g = substream(seed, ROLE_GENERATOR)
    U, _ = np.linalg.qr(g.standard_normal((n, k)))
    V, _ = np.linalg.qr(g.standard_normal((d, k)))
    sv = np.asarray(spec.singular_values)
    return (U * sv) @ V.T


def generate_sparse_random(n: int, d: int, nnz_per_row: int, seed: int) -> SparseMatrix:
    """Random sparse matrix with a fixed nonzero count per row.

    Columns are sampled without replacement per row, values are standard
    normal.
    """
    if not (0 < nnz_per_row <= d):
        raise ValueError("nnz_per_row must be in [1, d]")
    g = substream(seed, ROLE_GENERATOR)
    chunk = max(1, min(n, (1 << 25) // max(d, 1)))
    col_parts = []
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        # argpartition of uniforms = per-row random subset without replacement
        u = g.random((hi - lo, d))
        col_parts.append(np.argpartition(u, nnz_per_row - 1, axis=1)[:, :nnz_per_row])
    cols = np.concatenate(col_parts, axis=0)
    vals = g.standard_normal((n, nnz_per_row))
    rows = np.repeat(np.arange(n), nnz_per_row)
    return SparseMatrix.from_coo(n, d, rows, cols.ravel(), vals.ravel())


# Spectra used by the generator presets: 15 values at 1, 15 at a middle
# plateau, 30 at the tail.
def preset_spectrum(name: str, d: int = 60, ratio: float | None = None) -> SpectrumSpec:
    if name == "fixed_svd_1e7":
        sv = [1.0] * 15 + [1e-6] * 15 + [1e-7] * 30
    elif name == "fixed_svd_2.5e4":
        sv = [1.0] * 15 + [1e-3] * 15 + [4e-5] * 30
    elif name == "kl02_gap":
        # 64 well-separated strong directions plus a numerically dead tail
        sv = np.logspace(0.0, -4.0, 64).tolist() + [1e-14] * 7
    elif name == "linspace":
        if ratio is None or not (0 < ratio <= 1):
            raise ValueError("linspace preset needs a ratio in (0, 1]")
        sv = np.linspace(1.0, ratio, d).tolist()
    else:
        raise ValueError(f"unknown spectrum preset: {name!r}")
    return SpectrumSpec(tuple(sv))
