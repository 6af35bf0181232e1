"""Randomized right-preconditioning for overdetermined least squares.

The preconditioner N = V_k Sigma_k^{-1} comes from the SVD of a composed
sketch of A; A N is then well conditioned independently of A's spectrum,
and a Golub-Kahan bidiagonalization loop on the operator x -> A(Nx)
solves min ||Ax - b|| with x_hat = N y_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .matrix import SparseMatrix
from .rankrevealing import detect_rank_svd, eta_factor, pivoted_qr, xi_factor
from .sketch import countgauss_sketch


@dataclass(frozen=True)
class Preconditioner:
    """d x k right preconditioner with its probabilistic certificate."""

    N: np.ndarray
    k: int
    cert: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "N", np.ascontiguousarray(self.N, dtype=np.float64))
        if self.N.shape[1] != self.k:
            raise ValueError("N must have k columns")


@dataclass(frozen=True)
class LsqrResult:
    x: np.ndarray
    iterations: int
    residual_history: np.ndarray
    converged: bool


def kappa_bound(alpha: float, m: int, k: int, eps: float) -> float:
    """Certified bound on kappa(AN) for an m-row sketch of a rank-k matrix."""
    return xi_factor(alpha, k, m) * eta_factor(eps)


def kappa_certificate(m: int, k: int, eps: float, failure: float = 0.01) -> tuple[float | None, float]:
    """(alpha, bound) with alpha solving exp(-alpha^2 m / 2) = failure.

    Returns (None, inf) when that alpha falls outside the admissible range,
    i.e. the sketch is too small to certify anything at this failure level.
    """
    alpha = math.sqrt(2.0 * math.log(1.0 / failure) / m)
    if alpha >= 1.0 - math.sqrt(k / m):
        return None, math.inf
    return alpha, kappa_bound(alpha, m, k, eps)


def build_preconditioner(A: SparseMatrix, gamma: float = 2.0, delta: float = 1.0 / 3.0,
                         eps: float = 0.5, zeta: float = 1e-10, seed: int = 0,
                         method: str = "svd") -> Preconditioner:
    """Right preconditioner from the SVD (or pivoted QR) of the sketch.

    The numerical rank k always comes from the sketch's singular values;
    ``method="qr"`` only changes how the k-column factor is built (first k
    pivots of the sketch, inverted leading triangle).
    """
    if method not in ("svd", "qr"):
        raise ValueError("method must be 'svd' or 'qr'")
    At = countgauss_sketch(A, gamma=gamma, delta=delta, eps=eps, seed=seed)
    if not At.any():
        raise NumericalError("zero matrix has no preconditioner")
    m, d = At.shape
    _, sv, Vt = np.linalg.svd(At, full_matrices=False)
    k = detect_rank_svd(sv, zeta)
    if k == 0:
        raise NumericalError("sketch has no singular value above the cutoff")
    if method == "svd":
        N = Vt[:k].T / sv[:k]
    else:
        perm, R = pivoted_qr(At)
        R_k_inv = scipy.linalg.solve_triangular(R[:k, :k], np.eye(k))
        N = np.zeros((d, k))
        N[perm[:k]] = R_k_inv
    alpha, bound = kappa_certificate(m, k, eps)
    cert = {"alpha": alpha, "m": m, "eps": eps, "kappa_bound": bound, "method": method,
            "zeta": zeta, "seed": seed}
    return Preconditioner(N, k, cert)


def identity_preconditioner(d: int) -> Preconditioner:
    """No-op preconditioner (used to run the solver unpreconditioned)."""
    return Preconditioner(np.eye(d), d, {"method": "identity"})


def lsqr_preconditioned(A: SparseMatrix, precond: Preconditioner, b: np.ndarray,
                        tol: float = 1e-10, max_iter: int | None = None) -> LsqrResult:
    """LSQR on the operator y -> A(Ny); returns x_hat = N y_hat.

    Stops when the relative normal-equation residual
    ||(AN)^T r|| / (||AN|| * ||r||) drops below tol (or the residual itself
    reaches tol * ||b|| for consistent systems).  The residual history is
    non-increasing by construction of the Golub-Kahan recurrence.
    """
    N = precond.N
    n, d = A.shape
    if N.shape[0] != d or b.shape != (n,):
        raise ValueError("inconsistent dimensions between A, N and b")
    k = N.shape[1]
    if max_iter is None:
        max_iter = 4 * k

    def matvec(y):
        return A.matvec(N @ y)

    def rmatvec(u):
        return N.T @ A.rmatvec(u)

    b = np.asarray(b, dtype=np.float64)
    history = []
    y = np.zeros(k)
    beta = np.linalg.norm(b)
    history.append(beta)
    if beta == 0.0:
        return LsqrResult(N @ y, 0, np.asarray(history), True)
    u = b / beta
    v = rmatvec(u)
    alpha = np.linalg.norm(v)
    if alpha == 0.0:
        # b is orthogonal to the range: the zero solution is optimal
        return LsqrResult(N @ y, 0, np.asarray(history), True)
    v /= alpha
    w = v.copy()
    phibar = beta
    rhobar = alpha
    anorm2 = alpha * alpha
    bnorm = beta
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        u = matvec(v) - alpha * u
        beta = np.linalg.norm(u)
        if beta > 0.0:
            u /= beta
        v = rmatvec(u) - beta * v
        alpha = np.linalg.norm(v)
        if alpha > 0.0:
            v /= alpha
        anorm2 += alpha * alpha + beta * beta
        rho = math.hypot(rhobar, beta)
        c = rhobar / rho
        s = beta / rho
        theta = s * alpha
        rhobar = -c * alpha
        phi = c * phibar
        phibar = s * phibar
        y += (phi / rho) * w
        w = v - (theta / rho) * w
        rnorm = phibar
        arnorm = alpha * abs(c) * phibar
        anorm = math.sqrt(anorm2)
        history.append(rnorm)
        if rnorm <= tol * bnorm:
            converged = True
            break
        if anorm * rnorm > 0 and arnorm <= tol * anorm * rnorm:
            converged = True
            break
        if beta == 0.0 or alpha == 0.0:
            converged = True
            break
    return LsqrResult(N @ y, iterations, np.asarray(history), converged)
