"""Leverage-score estimators for tall-and-thin matrices.

Every estimator follows the same template: pick columns, build an
orthogonalizer X so that the selected columns times X have (nearly)
orthonormal columns, then read the scores off the squared row norms of
that product.  The five methods trade exactness for speed:

* ``leverage_gram_svd``   - exact scores of the dominant rank-k part, via
  the Gram matrix and its eigendecomposition.
* ``leverage_spqr``       - exact scores from Q-less column-pivoted
  Gram-Schmidt; competitive when the rank is far below d.
* ``leverage_hrn_exact``  - sketch-based column selection, then exact
  scores of the selected columns.
* ``leverage_sketched``   - scores approximated through a randomized
  subspace embedding (optionally compressed again on the right).
* ``leverage_hrn_approx`` - column selection plus the sketched estimator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .matrix import SparseMatrix, gram, product_row_norms, select_columns
from .rankrevealing import (ColumnSubset, countgauss_srrqr, detect_rank_svd, eta_factor,
                            rho_factor, xi_factor)
from .rng import ROLE_JLT, substream
from .sketch import (SketchSpec, apply_sketch, apply_srht, countsketch_rows,
                     gaussian_jlt_rows, gaussian_ose_rows)

METHODS = ("gram_svd", "spqr", "hrn_exact", "sketched", "hrn_approx")


@dataclass(frozen=True)
class LeverageScores:
    """Score vector with the rank it was computed at and how."""

    scores: np.ndarray
    k: int
    method: str
    subset: ColumnSubset | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "scores", np.ascontiguousarray(self.scores, dtype=np.float64))
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def coherence(self) -> float:
        return float(self.scores.max()) if self.scores.size else 0.0

    def to_json(self) -> str:
        return json.dumps(
            {"method": self.method, "k": self.k, "seed": self.params.get("seed"),
             "scores": self.scores.tolist()},
            sort_keys=True)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as f:
            f.write("row_index,score\n")
            for i, s in enumerate(self.scores.tolist()):
                f.write(f"{i},{s!r}\n")


def _require_tall(A: SparseMatrix) -> None:
    if A.n_rows < A.n_cols:
        raise ValueError(
            f"matrix is {A.n_rows}x{A.n_cols}; row scores need n >= d (transpose wide input)")


def _gram_resolution_floor(d: int) -> float:
    # the Gram route squares singular values, so ratios below sqrt(d*eps)
    # are indistinguishable from eigensolver noise and must not count as rank
    return math.sqrt(np.finfo(np.float64).eps * max(d, 1))


def _truncated_gram_orthogonalizer(B: np.ndarray, zeta: float) -> tuple[np.ndarray, int, np.ndarray]:
    """Columns of V_k / sigma_k from the Gram matrix B = A^T A.

    Singular values of A below zeta times the largest are dropped, which
    keeps the pseudoinverse well defined for rank-deficient input; the
    cutoff never goes below the Gram resolution floor.  Negative
    eigenvalues (roundoff) are clamped to zero.
    """
    w, V = np.linalg.eigh(B)
    w = w[::-1]
    V = V[:, ::-1]
    sigma = np.sqrt(np.clip(w, 0.0, None))
    k = detect_rank_svd(sigma, max(zeta, _gram_resolution_floor(B.shape[0])))
    return V[:, :k] / sigma[:k], k, sigma


def leverage_gram_svd(A: SparseMatrix, zeta: float = 1e-10) -> LeverageScores:
    """Exact scores over the dominant k-dimensional column space.

    Cost is O(nnz2(A) + d^3): one Gram accumulation, one d x d
    eigendecomposition, one row-norm pass.
    """
    _require_tall(A)
    X, k, sigma = _truncated_gram_orthogonalizer(gram(A), zeta)
    theta = product_row_norms(A, X)
    return LeverageScores(theta, k, "gram_svd", params={"zeta": zeta, "sigma": sigma.tolist()})


def leverage_spqr(A: SparseMatrix, zeta: float = 1e-10, max_k: int | None = None) -> LeverageScores:
    """Exact scores via Q-less column-pivoted Gram-Schmidt.

    Pivots on exact recomputed column norms (no downdating) and stops when
    the largest remaining norm falls below zeta times the first pivot norm
    or after max_k pivots.
    """
    _require_tall(A)
    n, d = A.shape
    limit = d if max_k is None else min(max_k, d)
    W = A.to_dense()
    R_rows = np.zeros((limit, d))
    perm: list[int] = []
    remaining = list(range(d))
    first_norm = 0.0
    for step in range(limit):
        norms = np.linalg.norm(W[:, remaining], axis=0)
        j = int(np.argmax(norms))
        pivot_norm = float(norms[j])
        if step == 0:
            first_norm = pivot_norm
        if pivot_norm == 0.0 or pivot_norm < zeta * first_norm:
            break
        col = remaining.pop(j)
        perm.append(col)
        q = W[:, col] / pivot_norm
        R_rows[step, col] = pivot_norm
        if remaining:
            coeffs = q @ W[:, remaining]
            R_rows[step, remaining] = coeffs
            W[:, remaining] -= np.outer(q, coeffs)
    k = len(perm)
    perm_arr = np.asarray(perm, dtype=np.int64)
    A_K = select_columns(A, perm_arr)
    if k:
        R_k = R_rows[:k][:, perm_arr]
        X = scipy.linalg.solve_triangular(R_k, np.eye(k))
        theta = product_row_norms(A_K, X)
        subset = ColumnSubset(perm_arr, k, R_k, np.abs(np.diag(R_k)))
    else:
        theta = np.zeros(n)
        subset = None
    return LeverageScores(theta, k, "spqr", subset=subset, params={"zeta": zeta, "max_k": limit})


def leverage_hrn_exact(A: SparseMatrix, zeta: float = 1e-10, seed: int = 0) -> LeverageScores:
    """Column selection on the composed sketch, then exact scores of A[:, K].

    The selection stage runs with the fixed internals gamma=2, eps=0.5,
    delta=1/3; the scores of the selected columns are computed exactly
    through their Gram matrix.
    """
    _require_tall(A)
    subset, report = countgauss_srrqr(A, gamma=2.0, eps=0.5, delta=1.0 / 3.0, zeta=zeta, seed=seed)
    if subset.k == 0:
        return LeverageScores(np.zeros(A.n_rows), 0, "hrn_exact", subset=subset,
                              params={"zeta": zeta, "seed": seed, "rank_method": report.method})
    A_K = select_columns(A, subset.perm)
    # the selected columns are independent by construction, so only the
    # resolution floor applies here, not the rank cutoff
    X, k, sigma = _truncated_gram_orthogonalizer(gram(A_K), 0.0)
    theta = product_row_norms(A_K, X)
    return LeverageScores(theta, k, "hrn_exact", subset=subset,
                          params={"zeta": zeta, "seed": seed, "rank_method": report.method,
                                  "sigma_subset": sigma.tolist()})


def leverage_sketched(A_K: SparseMatrix, spec1: SketchSpec | None, spec2: SketchSpec | None = None,
                      seed: int = 0) -> LeverageScores:
    """Approximate scores of a full-column-rank matrix through a sketch.

    The orthogonalizer comes from the SVD of the sketched matrix; with
    ``spec1=None`` the matrix itself is used and the scores are exact.
    Because the sketch only fixes the column space up to scale, the scores
    are normalized to sum to the column count (an identity for true
    leverage scores) and clipped at 1.
    """
    n, k_cols = A_K.shape
    if k_cols == 0:
        return LeverageScores(np.zeros(n), 0, "sketched", params={"seed": seed})
    if spec1 is None:
        At = A_K.to_dense()
    else:
        At = apply_sketch(A_K, spec1)
    _, sv, Vt = np.linalg.svd(At, full_matrices=False)
    if sv[0] == 0.0 or sv[-1] <= 1e-12 * sv[0]:
        raise NumericalError(
            "sketched matrix is numerically rank deficient; select independent columns first "
            "(countgauss_srrqr) and sketch the subset")
    X = Vt.T / sv
    params: dict = {"seed": seed, "spec1": spec1.to_json() if spec1 else None}
    if spec2 is not None:
        if spec2.kind == "srht":
            # sampled-Hadamard right transform; only useful with fewer
            # output columns than the padded row count allows
            r2 = spec2.m if spec2.m is not None else gaussian_jlt_rows(max(n, 2), spec2.eps)
            X = apply_srht(X.T, r2, spec2.seed).T
        else:
            r2 = gaussian_jlt_rows(max(n, 2), spec2.eps)
            g = substream(spec2.seed, ROLE_JLT)
            X = X @ (g.standard_normal((k_cols, r2)) / math.sqrt(r2))
        params["spec2"] = spec2.to_json()
        params["r2"] = r2
    theta = product_row_norms(A_K, X)
    total = theta.sum()
    if total > 0:
        theta = theta * (k_cols / total)
    theta = np.minimum(theta, 1.0)
    return LeverageScores(theta, k_cols, "sketched", params=params)


def leverage_hrn_approx(A: SparseMatrix, zeta: float = 1e-10, eps: float = 0.5,
                        seed: int = 0) -> LeverageScores:
    """Column selection, then the sketched estimator on the selected columns.

    The selection stage uses the fixed internals gamma=2, eps=0.5,
    delta=1/3.  The estimation sketch is sized by ``eps`` on both stages;
    the right-hand JLT is engaged only when it would actually shrink the
    row-norm computation (fewer than k columns).
    """
    _require_tall(A)
    subset, report = countgauss_srrqr(A, gamma=2.0, eps=0.5, delta=1.0 / 3.0, zeta=zeta, seed=seed)
    if subset.k == 0:
        return LeverageScores(np.zeros(A.n_rows), 0, "hrn_approx", subset=subset,
                              params={"zeta": zeta, "eps": eps, "seed": seed})
    A_K = select_columns(A, subset.perm)
    k = subset.k
    m1 = gaussian_ose_rows(k, eps, 1.0 / 3.0)
    # at tiny ranks the embedding formula can undercut m; extra rows only help
    r1 = max(countsketch_rows(k, eps, 1.0 / 3.0), m1)
    spec1 = SketchSpec("countgauss", m=m1, r=r1, seed=seed, eps=eps, delta=1.0 / 3.0)
    r2 = gaussian_jlt_rows(max(A.n_rows, 2), eps)
    spec2 = SketchSpec("gaussian", m=r2, seed=seed + 1, eps=eps) if r2 < k else None
    result = leverage_sketched(A_K, spec1, spec2, seed=seed)
    params = dict(result.params)
    params.update({"zeta": zeta, "eps": eps, "seed": seed, "rank_method": report.method,
                   "m": spec1.m, "r": spec1.r, "pi2": spec2 is not None})
    return LeverageScores(result.scores, k, "hrn_approx", subset=subset, params=params)


def hrn_exact_bound(theta_k: float, theta_tilde: float, sigma_k: float, sigma_k1: float,
                    k: int, m: int, d: int, alpha: float, eps: float, phi: float) -> float:
    """Guaranteed gap between exact truncated scores and subset scores."""
    if sigma_k <= 0:
        raise NumericalError("sigma_k must be positive")
    factor = xi_factor(alpha, k, m) * eta_factor(eps) * rho_factor(phi, k, d)
    return (math.sqrt(theta_k) + math.sqrt(theta_tilde)) * (sigma_k1 / sigma_k) * factor


def hrn_approx_bound(theta_k: float, theta_tilde: float, sigma_k: float, sigma_k1: float,
                     k: int, m: int, d: int, alpha: float, eps: float, phi: float,
                     eps_tilde: float) -> float:
    """Sketched-estimator error bound; eps_tilde is the embedding accuracy."""
    base = hrn_exact_bound(theta_k, theta_tilde, sigma_k, sigma_k1, k, m, d, alpha, eps, phi)
    return eps_tilde * theta_k + (1.0 + eps_tilde) * base
