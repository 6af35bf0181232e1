"""Compiled CSR kernels.

All kernels operate on raw CSR arrays (row_offsets, col_indices, values)
so they stay independent of the SparseMatrix wrapper.  Parallel kernels
are written so that, for a fixed block count, the accumulation order is
fixed; kernels that reduce across blocks take an explicit ``nblocks``
(1 = sequential reference path).
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def csr_gram_upper(indptr, indices, data, n_rows, n_cols, nblocks):
    """Upper triangle of A^T A accumulated from row outer products.

    Each block owns a contiguous row range and a private accumulator;
    partials are merged in block order. Cost: sum of squared row nnz.
    """
    parts = np.zeros((nblocks, n_cols, n_cols))
    for b in prange(nblocks):
        lo = b * n_rows // nblocks
        hi = (b + 1) * n_rows // nblocks
        for i in range(lo, hi):
            start = indptr[i]
            end = indptr[i + 1]
            for p in range(start, end):
                j = indices[p]
                vj = data[p]
                for q in range(p, end):
                    parts[b, j, indices[q]] += vj * data[q]
    out = np.zeros((n_cols, n_cols))
    for b in range(nblocks):
        out += parts[b]
    return out


@njit(cache=True, parallel=True)
def csr_row_norms_direct(indptr, indices, data, n_rows, B):
    """Squared row norms of A @ B, one row-vector product per row."""
    r = B.shape[1]
    out = np.zeros(n_rows)
    for i in prange(n_rows):
        y = np.zeros(r)
        for p in range(indptr[i], indptr[i + 1]):
            v = data[p]
            row = indices[p]
            for t in range(r):
                y[t] += v * B[row, t]
        acc = 0.0
        for t in range(r):
            acc += y[t] * y[t]
        out[i] = acc
    return out


@njit(cache=True, parallel=True)
def csr_row_norms_gram(indptr, indices, data, n_rows, C):
    """Squared row norms of A @ B from the precomputed C = B B^T.

    Quadratic in each row's nnz; cheaper than the direct path when rows
    are sparse relative to B's column count.
    """
    out = np.zeros(n_rows)
    for i in prange(n_rows):
        start = indptr[i]
        end = indptr[i + 1]
        acc = 0.0
        for p in range(start, end):
            jp = indices[p]
            vp = data[p]
            acc += vp * vp * C[jp, jp]
            for q in range(p + 1, end):
                acc += 2.0 * vp * data[q] * C[jp, indices[q]]
        out[i] = abs(acc)
    return out


@njit(cache=True, parallel=True)
def countsketch_accumulate(indptr, indices, data, order, bounds, targets, signs, r, n_cols):
    """Scatter sign-scaled input rows into their hashed output rows.

    ``order`` lists input rows grouped by target; ``bounds`` splits the
    groups into chunks so no two chunks touch the same output row, which
    makes the parallel result bitwise equal to the sequential one.
    """
    out = np.zeros((r, n_cols))
    nchunks = bounds.shape[0] - 1
    for c in prange(nchunks):
        for idx in range(bounds[c], bounds[c + 1]):
            i = order[idx]
            tr = targets[i]
            s = signs[i]
            for p in range(indptr[i], indptr[i + 1]):
                out[tr, indices[p]] += s * data[p]
    return out


@njit(cache=True, parallel=True)
def csr_matvec(indptr, indices, data, n_rows, x):
    out = np.zeros(n_rows)
    for i in prange(n_rows):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc
    return out


@njit(cache=True, parallel=True)
def csr_rmatvec(indptr, indices, data, n_rows, n_cols, y, nblocks):
    """A^T y via blocked accumulation (merge order fixed by block index)."""
    parts = np.zeros((nblocks, n_cols))
    for b in prange(nblocks):
        lo = b * n_rows // nblocks
        hi = (b + 1) * n_rows // nblocks
        for i in range(lo, hi):
            yi = y[i]
            if yi != 0.0:
                for p in range(indptr[i], indptr[i + 1]):
                    parts[b, indices[p]] += data[p] * yi
    out = np.zeros(n_cols)
    for b in range(nblocks):
        out += parts[b]
    return out


@njit(cache=True, parallel=True)
def dense_csr_matmul(G, indptr, indices, data, n_cols):
    """G @ A for dense G and CSR A, parallel over output rows."""
    m = G.shape[0]
    n = G.shape[1]
    out = np.zeros((m, n_cols))
    for t in prange(m):
        for i in range(n):
            g = G[t, i]
            if g != 0.0:
                for p in range(indptr[i], indptr[i + 1]):
                    out[t, indices[p]] += g * data[p]
    return out
