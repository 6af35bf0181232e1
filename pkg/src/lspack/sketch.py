"""Randomized dimensionality-reduction transforms and their compositions.

Provides CountSketch, Gaussian and subsampled-Hadamard transforms, the
sizing formulas that make them subspace embeddings, and the two
compositions used throughout the library: a Gaussian stage applied to a
CountSketch (``countgauss_sketch``) and an SRHT stage applied to a
CountSketch (``srht_countsketch``).

The Gaussian block G is stored and applied *unnormalized* (i.i.d. standard
normal).  Norm-preserving usage requires the caller to scale by 1/sqrt(m);
the preconditioning and rank-detection paths are scale-invariant and use G
as is.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import config
from ._kernels import countsketch_accumulate
from .errors import MemoryBudgetError
from .matrix import SparseMatrix
from .rng import ROLE_COUNTSKETCH, ROLE_GAUSSIAN, ROLE_SRHT, substream

SKETCH_KINDS = ("gaussian", "countsketch", "srht", "countgauss", "srht_countsketch")


@dataclass(frozen=True)
class SketchSpec:
    """Declarative description of a sketch.

    ``m`` is the output row count, ``r`` the inner (CountSketch) row count
    for compositions; either may be None to request the formula-based
    default.
    """

    kind: str
    m: int | None = None
    r: int | None = None
    seed: int = 0
    eps: float = 0.5
    delta: float = 1.0 / 3.0
    gamma: float = 2.0

    def __post_init__(self):
        if self.kind not in SKETCH_KINDS:
            raise ValueError(f"unknown sketch kind {self.kind!r}")
        if not (0.0 < self.eps < 1.0):
            raise ValueError("eps must be in (0, 1)")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must be in (0, 1)")
        if not (1.0 < self.gamma <= 3.0):
            raise ValueError("gamma must be in (1, 3]")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        if self.m is not None and self.r is not None and self.r < self.m:
            raise ValueError("compositions need r >= m")

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "m": self.m, "r": self.r, "seed": self.seed,
             "eps": self.eps, "delta": self.delta, "gamma": self.gamma},
            sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SketchSpec":
        obj = json.loads(text)
        return cls(**obj)


@dataclass(frozen=True)
class CountSketchPlan:
    """Hash targets and signs mapping each input row to one output row."""

    out_rows: int
    hash_targets: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "hash_targets", np.ascontiguousarray(self.hash_targets, dtype=np.int64))
        object.__setattr__(self, "signs", np.ascontiguousarray(self.signs, dtype=np.float64))
        if self.hash_targets.shape != self.signs.shape:
            raise ValueError("hash_targets and signs must have equal length")
        if self.hash_targets.size and (self.hash_targets.min() < 0 or self.hash_targets.max() >= self.out_rows):
            raise ValueError("hash target out of range")
        if self.signs.size and not np.all(np.abs(self.signs) == 1.0):
            raise ValueError("signs must be +-1")


# -- sizing formulas -------------------------------------------------------

def countsketch_rows(d: int, eps: float, delta: float) -> int:
    """Rows needed for a CountSketch to embed a d-dimensional subspace."""
    if not (0.0 < eps < 1.0 and 0.0 < delta < 1.0):
        raise ValueError("eps and delta must be in (0, 1)")
    return math.ceil((d * d + d) / (delta * (2.0 * eps - eps * eps) ** 2))


def gaussian_jlt_rows(n_points: int, eps: float) -> int:
    """Rows for a (scaled) Gaussian matrix to be a JLT for n_points vectors."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must be in (0, 1)")
    return math.ceil(4.0 * math.log(n_points) / (eps * eps / 2.0 - eps ** 3 / 3.0))


def gaussian_ose_rows(k: int, eps: float, delta: float) -> int:
    """Rows for a scaled Gaussian matrix to embed a k-dim subspace.

    Sized so the additive distortion sqrt(k/m) + alpha stays below eps
    while 2*exp(-alpha^2 m / 2) <= delta.
    """
    if not (0.0 < eps < 1.0 and 0.0 < delta < 1.0):
        raise ValueError("eps and delta must be in (0, 1)")
    return math.ceil((math.sqrt(k) + math.sqrt(2.0 * math.log(2.0 / delta))) ** 2 / (eps * eps))


def srht_rows(n: int, d: int) -> int:
    """Rows for a subsampled Hadamard transform to embed a d-dim subspace."""
    if not (n >= d >= 2):
        raise ValueError("need n >= d >= 2")
    return math.ceil(4.0 * (math.sqrt(d) + math.sqrt(math.log(n * d))) ** 2 * math.log(d))


# -- elementary transforms -------------------------------------------------

def countsketch_plan(n: int, r: int, seed: int) -> CountSketchPlan:
    """Fresh plan: targets then signs drawn from the (seed, countsketch) stream."""
    g = substream(seed, ROLE_COUNTSKETCH)
    targets = g.integers(0, r, size=n)
    signs = 2.0 * g.integers(0, 2, size=n) - 1.0
    return CountSketchPlan(r, targets, signs)


def apply_countsketch(A: SparseMatrix, plan: CountSketchPlan) -> np.ndarray:
    """S @ A in one pass over the nonzeros; output is dense r x d."""
    if plan.hash_targets.size != A.n_rows:
        raise ValueError("plan length must equal the matrix row count")
    order = np.argsort(plan.hash_targets, kind="stable").astype(np.int64)
    nchunks = config.worker_blocks(A.n_rows)
    if nchunks == 1:
        bounds = np.array([0, A.n_rows], dtype=np.int64)
    else:
        # chunk boundaries land on hash-target group edges so that no two
        # chunks write the same output row
        sorted_targets = plan.hash_targets[order]
        wanted = np.linspace(0, plan.out_rows, nchunks + 1)
        bounds = np.searchsorted(sorted_targets, wanted).astype(np.int64)
        bounds[0], bounds[-1] = 0, A.n_rows
    return countsketch_accumulate(A.row_offsets, A.col_indices, A.values, order, bounds,
                                  plan.hash_targets, plan.signs, plan.out_rows, A.n_cols)


def apply_gaussian(B: np.ndarray, m: int, seed: int, batch_bytes: int | None = None) -> np.ndarray:
    """G @ B for an m x r standard-normal G drawn row-major from the seed.

    G is generated in row batches sized to the memory budget; the stream
    is consumed sequentially, so the result does not depend on the batch
    size and is bitwise reproducible across runs and thread counts.
    """
    B = np.ascontiguousarray(B, dtype=np.float64)
    if B.ndim != 2:
        raise ValueError("B must be 2-D")
    if m < 1:
        raise ValueError("m must be >= 1")
    r = B.shape[0]
    budget = batch_bytes if batch_bytes is not None else config.DEFAULT_MEMORY_BUDGET
    rows_per_batch = max(1, int(budget // max(8 * r, 1)))
    g = substream(seed, ROLE_GAUSSIAN)
    out = np.empty((m, B.shape[1]))
    for lo in range(0, m, rows_per_batch):
        hi = min(m, lo + rows_per_batch)
        G = g.standard_normal((hi - lo, r))
        out[lo:hi] = G @ B
    return out


def hadamard_transform(X: np.ndarray) -> np.ndarray:
    """Orthonormal fast Walsh-Hadamard transform along axis 0.

    Row count must be a power of two; applying the transform twice
    recovers the input.
    """
    X = np.array(X, dtype=np.float64, copy=True)
    p = X.shape[0]
    if p & (p - 1):
        raise ValueError("row count must be a power of two")
    h = 1
    while h < p:
        Y = X.reshape(p // (2 * h), 2, h, -1)
        a = Y[:, 0].copy()
        Y[:, 0] += Y[:, 1]
        Y[:, 1] = a - Y[:, 1]
        h *= 2
    X *= 1.0 / math.sqrt(p)
    return X


def apply_srht(B: np.ndarray, t: int, seed: int) -> np.ndarray:
    """Subsampled randomized Hadamard transform of B's rows.

    Zero-pads to the next power of two p, applies a random sign diagonal
    and the orthonormal Hadamard transform, then keeps t rows sampled
    uniformly without replacement, scaled by sqrt(p/t).
    """
    B = np.ascontiguousarray(B, dtype=np.float64)
    r = B.shape[0]
    p = 1 << max(r - 1, 0).bit_length() if r > 1 else 1
    if t > p:
        raise ValueError(f"t={t} exceeds padded row count {p}")
    g = substream(seed, ROLE_SRHT)
    signs = 2.0 * g.integers(0, 2, size=p) - 1.0
    X = np.zeros((p, B.shape[1]))
    X[:r] = B * signs[:r, None]
    X = hadamard_transform(X)
    rows = np.sort(g.choice(p, size=t, replace=False))
    return X[rows] * math.sqrt(p / t)


# -- compositions ----------------------------------------------------------

def _resolve_countsketch_rows(d: int, eps: float, delta: float, r_override: int | None,
                              max_bytes: int | None) -> int:
    r = int(r_override) if r_override is not None else countsketch_rows(d, eps, delta)
    budget = max_bytes if max_bytes is not None else config.DEFAULT_MEMORY_BUDGET
    if 8 * r * max(d, 1) > budget:
        raise MemoryBudgetError(
            f"CountSketch intermediate of {r}x{d} doubles exceeds the {budget}-byte budget; "
            "use the srht_countsketch kind or lower r")
    return r


def _soft_tallness_check(A: SparseMatrix) -> None:
    if A.n_rows < A.n_cols * A.n_cols:
        warnings.warn(
            f"matrix is {A.n_rows}x{A.n_cols}; the composed sketch pays off only when n >> d^2",
            stacklevel=3)


def countgauss_sketch(A: SparseMatrix, gamma: float = 2.0, delta: float = 1.0 / 3.0,
                      eps: float = 0.5, seed: int = 0, r_override: int | None = None,
                      m_override: int | None = None, max_bytes: int | None = None) -> np.ndarray:
    """G(SA): CountSketch to r rows, then an unnormalized Gaussian to m rows.

    r follows the CountSketch embedding formula unless overridden; m is
    ceil(gamma * d) unless overridden.  The Gaussian block streams in row
    batches against the dense r x d intermediate, so memory stays within
    the budget.  S and G draw from independent substreams of ``seed``.
    """
    _soft_tallness_check(A)
    d = A.n_cols
    r = _resolve_countsketch_rows(d, eps, delta, r_override, max_bytes)
    m = int(m_override) if m_override is not None else math.ceil(gamma * d)
    SA = apply_countsketch(A, countsketch_plan(A.n_rows, r, seed))
    return apply_gaussian(SA, m, seed, batch_bytes=max_bytes)


def srht_countsketch(A: SparseMatrix, t: int, eps: float = 0.5, delta: float = 1.0 / 3.0,
                     seed: int = 0, r_override: int | None = None,
                     max_bytes: int | None = None) -> np.ndarray:
    """F(SA): CountSketch to r rows, then an SRHT down to t rows."""
    _soft_tallness_check(A)
    r = _resolve_countsketch_rows(A.n_cols, eps, delta, r_override, max_bytes)
    SA = apply_countsketch(A, countsketch_plan(A.n_rows, r, seed))
    return apply_srht(SA, t, seed)


def apply_sketch(A: SparseMatrix, spec: SketchSpec, max_bytes: int | None = None) -> np.ndarray:
    """Dispatch a SketchSpec against a sparse matrix."""
    d = A.n_cols
    if spec.kind == "countgauss":
        return countgauss_sketch(A, gamma=spec.gamma, delta=spec.delta, eps=spec.eps,
                                 seed=spec.seed, r_override=spec.r, m_override=spec.m,
                                 max_bytes=max_bytes)
    if spec.kind == "srht_countsketch":
        t = spec.m if spec.m is not None else math.ceil(spec.gamma * d)
        return srht_countsketch(A, t, eps=spec.eps, delta=spec.delta, seed=spec.seed,
                                r_override=spec.r, max_bytes=max_bytes)
    if spec.kind == "countsketch":
        r = spec.m if spec.m is not None else countsketch_rows(d, spec.eps, spec.delta)
        return apply_countsketch(A, countsketch_plan(A.n_rows, r, spec.seed))
    if spec.kind == "gaussian":
        m = spec.m if spec.m is not None else math.ceil(spec.gamma * d)
        return apply_gaussian(A.to_dense(), m, spec.seed)
    if spec.kind == "srht":
        t = spec.m if spec.m is not None else srht_rows(A.n_rows, d)
        return apply_srht(A.to_dense(), t, spec.seed)
    raise ValueError(f"unknown sketch kind {spec.kind!r}")
