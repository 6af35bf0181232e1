"""Pivoted QR, numerical-rank detection and sketch-based column selection.

Column subset selection runs Businger-Golub pivoted QR (LAPACK xGEQP3
semantics via SciPy) on the composed sketch of the input.  The rank is
read from the QR diagonal when it shows a clean gap at the cutoff and
from the sketch's singular values otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .matrix import SparseMatrix
from .sketch import countgauss_sketch


@dataclass(frozen=True)
class ColumnSubset:
    """Selected columns in pivot order with the leading triangular factor."""

    perm: np.ndarray
    k: int
    R_k: np.ndarray
    diag_R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "perm", np.ascontiguousarray(self.perm, dtype=np.int64))
        object.__setattr__(self, "R_k", np.ascontiguousarray(self.R_k, dtype=np.float64))
        object.__setattr__(self, "diag_R", np.ascontiguousarray(self.diag_R, dtype=np.float64))
        if self.perm.size != self.k:
            raise ValueError("perm must list exactly k columns")
        if np.unique(self.perm).size != self.perm.size:
            raise ValueError("perm entries must be distinct")
        if self.R_k.shape != (self.k, self.k):
            raise ValueError("R_k must be k x k")
        if self.k:
            if np.any(np.diag(self.R_k) == 0.0):
                raise ValueError("R_k must have a nonzero diagonal")
            if np.any(np.tril(self.R_k, -1) != 0.0):
                raise ValueError("R_k must be upper triangular")

    def to_json(self) -> str:
        return json.dumps(
            {"k": self.k, "perm": self.perm.tolist(), "diag_R": self.diag_R.tolist()},
            sort_keys=True)


@dataclass(frozen=True)
class RankReport:
    """Rank decision plus the values it was based on.

    ``gap_index``/``gap_ratio`` record where the largest consecutive drop
    sits; they are diagnostic only and never drive the decision.
    """

    k: int
    method: str
    cutoff: float
    sigma_or_diag: np.ndarray = field(repr=False)
    gap_index: int | None = None
    gap_ratio: float | None = None

    def __post_init__(self):
        if self.method not in ("qr_diag", "svd_cutoff"):
            raise ValueError(f"unknown rank method {self.method!r}")
        if not (0 <= self.k <= self.sigma_or_diag.size) and self.sigma_or_diag.size:
            raise ValueError("rank outside [0, d]")

    def to_json(self) -> str:
        return json.dumps(
            {"k": self.k, "method": self.method, "cutoff": self.cutoff,
             "values": np.asarray(self.sigma_or_diag).tolist(),
             "gap_index": self.gap_index, "gap_ratio": self.gap_ratio},
            sort_keys=True)


def pivoted_qr(B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column-pivoted QR of a tall dense matrix; returns (perm, R).

    The pivot at every step is the remaining column of maximal norm, so the
    diagonal of R is non-increasing in magnitude.  Q is not formed.
    """
    B = np.ascontiguousarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] < B.shape[1]:
        raise ValueError("pivoted_qr expects a tall (m >= d) dense matrix")
    R, perm = scipy.linalg.qr(B, mode="r", pivoting=True)
    return perm.astype(np.int64), np.ascontiguousarray(R[: B.shape[1]])


def _largest_gap(values: np.ndarray) -> tuple[int | None, float | None]:
    v = np.abs(np.asarray(values, dtype=np.float64))
    if v.size < 2 or v[0] == 0.0:
        return None, None
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(v[:-1] > 0, v[1:] / v[:-1], np.inf)
    j = int(np.argmin(ratios))
    return j + 1, float(ratios[j])


def detect_rank_qr(diag_R: np.ndarray, zeta: float) -> int:
    """Count of diagonal entries at or above zeta times the leading one."""
    d = np.abs(np.asarray(diag_R, dtype=np.float64))
    if d.size == 0 or d[0] == 0.0:
        return 0
    if np.any(d[1:] > d[:-1] * (1.0 + 1e-10) + 1e-300):
        raise ValueError("pivoted-QR diagonal must be non-increasing in magnitude")
    return int(np.count_nonzero(d >= zeta * d[0]))


def detect_rank_svd(sigma: np.ndarray, zeta: float) -> int:
    """Count of singular values strictly above zeta times the largest."""
    s = np.asarray(sigma, dtype=np.float64)
    if s.size == 0 or s[0] == 0.0:
        return 0
    if np.any(s < 0) or np.any(s[1:] > s[:-1] * (1.0 + 1e-10)):
        raise ValueError("singular values must be non-negative and non-increasing")
    return int(np.count_nonzero(s > zeta * s[0]))


def _qr_rank_is_conclusive(diag: np.ndarray, zeta: float) -> tuple[int, bool]:
    """QR-diagonal rank and whether the cutoff sits under a clean gap.

    Conclusive means the smallest kept diagonal is at least 10x the cutoff;
    otherwise the decision is handed to the singular values.
    """
    d = np.abs(np.asarray(diag, dtype=np.float64))
    if d.size == 0 or d[0] == 0.0:
        return 0, True
    k = detect_rank_qr(d, zeta)
    return k, bool(d[k - 1] >= 10.0 * zeta * d[0])


def countgauss_srrqr(A: SparseMatrix, gamma: float = 2.0, eps: float = 0.5,
                     delta: float = 1.0 / 3.0, zeta: float = 1e-10, seed: int = 0,
                     max_bytes: int | None = None) -> tuple[ColumnSubset, RankReport]:
    """Column subset selection on the composed sketch of A.

    Sketches A to ceil(gamma * d) rows, runs pivoted QR on the sketch, and
    keeps the first k pivots, where k comes from the QR diagonal when its
    gap at the cutoff is clean and from the sketch's singular values
    otherwise.
    """
    d = A.n_cols
    if d == 0 or A.nnz == 0:
        empty = ColumnSubset(np.zeros(0, dtype=np.int64), 0, np.zeros((0, 0)), np.zeros(d))
        return empty, RankReport(0, "qr_diag", zeta, np.zeros(d))
    At = countgauss_sketch(A, gamma=gamma, delta=delta, eps=eps, seed=seed, max_bytes=max_bytes)
    perm, R = pivoted_qr(At)
    diag = np.abs(np.diag(R))
    k, conclusive = _qr_rank_is_conclusive(diag, zeta)
    if conclusive:
        gi, gr = _largest_gap(diag)
        report = RankReport(k, "qr_diag", zeta, diag, gi, gr)
    else:
        sigma = np.linalg.svd(At, compute_uv=False)
        k = detect_rank_svd(sigma, zeta)
        gi, gr = _largest_gap(sigma)
        report = RankReport(k, "svd_cutoff", zeta, sigma, gi, gr)
    subset = ColumnSubset(perm[:k], k, R[:k, :k], diag)
    return subset, report


def xi_factor(alpha: float, k: int, m: int) -> float:
    """Distortion of an m-row Gaussian embedding on a k-dim subspace."""
    root = math.sqrt(k / m)
    if not (0.0 < alpha < 1.0 - root):
        raise NumericalError(f"alpha must lie in (0, {1.0 - root:.4f}) for k/m = {k}/{m}")
    return (1.0 + alpha + root) / (1.0 - alpha - root)


def eta_factor(eps: float) -> float:
    """Distortion of an eps-accurate subspace embedding."""
    if not (0.0 <= eps < 1.0):
        raise NumericalError("eps must be in [0, 1)")
    return (1.0 + eps) / (1.0 - eps)


def rho_factor(phi: float, k: int, d: int) -> float:
    """Pivoted-QR singular value distortion with pivot parameter phi."""
    if phi < 1.0:
        raise NumericalError("phi must be >= 1")
    return math.sqrt(1.0 + phi * phi * k * (d - k))


def subset_sigma_min_bound(k: int, m: int, d: int, alpha: float, eps: float, phi: float) -> float:
    """Guaranteed fraction of sigma_k(A) retained by the selected columns."""
    return 1.0 / (xi_factor(alpha, k, m) * eta_factor(eps) * rho_factor(phi, k, d))
