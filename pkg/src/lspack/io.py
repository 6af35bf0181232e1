"""Matrix Market coordinate files and the LSPDENSE binary container.

The Matrix Market support covers real (or integer-valued) coordinate
files in general or symmetric form.  Values are written with 17
significant digits so that a write/read round trip reproduces the stored
float64 values bit for bit.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .matrix import SparseMatrix

_MAGIC = b"LSPDENSE"


def read_matrix_market(path) -> SparseMatrix:
    with open(path, "r", encoding="ascii") as f:
        header = f.readline()
        if not header.lower().startswith("%%matrixmarket"):
            raise FormatError(f"{path}: missing %%MatrixMarket header")
        tokens = header.strip().split()
        if len(tokens) != 5:
            raise FormatError(f"{path}: malformed header line: {header.strip()!r}")
        _, obj, fmt, fld, sym = (t.lower() for t in tokens)
        if obj != "matrix" or fmt != "coordinate":
            raise FormatError(f"{path}: only 'matrix coordinate' files are supported, got '{obj} {fmt}'")
        if fld not in ("real", "integer"):
            raise FormatError(f"{path}: field '{fld}' is not supported (real or integer only)")
        if sym not in ("general", "symmetric"):
            raise FormatError(f"{path}: symmetry '{sym}' is not supported (general or symmetric only)")
        line = f.readline()
        while line.startswith("%") or line.strip() == "":
            if line == "":
                raise FormatError(f"{path}: missing size line")
            line = f.readline()
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}: malformed size line: {line.strip()!r}")
        try:
            n, d, nnz = (int(p) for p in parts)
        except ValueError as e:
            raise FormatError(f"{path}: malformed size line: {line.strip()!r}") from e
        body = np.loadtxt(f, comments="%", ndmin=2) if nnz else np.zeros((0, 3))
    if body.shape[0] != nnz or (body.size and body.shape[1] != 3):
        raise FormatError(f"{path}: expected {nnz} entries of 3 fields, got shape {body.shape}")
    rows = body[:, 0].astype(np.int64) - 1
    cols = body[:, 1].astype(np.int64) - 1
    vals = body[:, 2]
    if nnz and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= d):
        raise FormatError(f"{path}: coordinate index out of bounds for {n}x{d} matrix")
    if sym == "symmetric":
        if n != d:
            raise FormatError(f"{path}: symmetric file must be square, got {n}x{d}")
        off = rows != cols
        if np.any(rows[off] < cols[off]):
            raise FormatError(f"{path}: symmetric file must store the lower triangle only")
        rows, cols = np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]])
        vals = np.concatenate([vals, vals[off]])
    return SparseMatrix.from_coo(n, d, rows, cols, vals)


def write_matrix_market(A: SparseMatrix, path) -> None:
    rows = np.repeat(np.arange(A.n_rows), A.row_nnz()) + 1
    cols = A.col_indices + 1
    with open(path, "w", encoding="ascii") as f:
        f.write("%%MatrixMarket matrix coordinate real general\n")
        f.write(f"{A.n_rows} {A.n_cols} {A.nnz}\n")
        np.savetxt(f, np.column_stack([rows, cols, A.values]), fmt="%d %d %.17g")


def write_dense_binary(arr: np.ndarray, path) -> None:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise FormatError("dense binary container stores 2-D matrices only")
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<QQ", arr.shape[0], arr.shape[1]))
        f.write(arr.astype("<f8").tobytes(order="C"))


def read_dense_binary(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != _MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
        n, d = struct.unpack("<QQ", f.read(16))
        data = np.frombuffer(f.read(), dtype="<f8")
    if data.size != n * d:
        raise FormatError(f"{path}: truncated payload: expected {n * d} values, got {data.size}")
    return data.reshape(n, d).astype(np.float64)


def read_matrix(path) -> SparseMatrix:
    """Load either container as a SparseMatrix (dense entries are sparsified)."""
    path = str(path)
    if path.endswith(".bin"):
        return SparseMatrix.from_dense(read_dense_binary(path))
    return read_matrix_market(path)
