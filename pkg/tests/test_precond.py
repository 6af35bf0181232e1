import math

import numpy as np
import pytest

import lspack as lp
from lspack.errors import NumericalError

from conftest import random_dense_sparse


def measured_kappa(dense: np.ndarray, N: np.ndarray) -> float:
    sv = np.linalg.svd(dense @ N, compute_uv=False)
    return float(sv[0] / sv[-1])


class TestKappaBound:
    def test_eps_zero_reduces_to_gaussian_factor(self):
        from lspack.rankrevealing import xi_factor
        assert lp.kappa_bound(0.2, 100, 25, 0.0) == xi_factor(0.2, 25, 100)

    def test_spot_value(self):
        assert lp.kappa_bound(0.3, 100, 25, 0.0) == pytest.approx(9.0)

    def test_blows_up_at_domain_edge(self):
        edge = 1.0 - math.sqrt(25 / 100)
        assert lp.kappa_bound(edge - 1e-9, 100, 25, 0.0) > 1e8
        with pytest.raises(NumericalError):
            lp.kappa_bound(edge, 100, 25, 0.0)

    def test_certificate_infeasible_for_tiny_sketch(self):
        alpha, bound = lp.kappa_certificate(16, 8, 0.5)
        assert alpha is None and bound == math.inf

    def test_certificate_standard_case(self):
        alpha, bound = lp.kappa_certificate(120, 60, 0.5)
        assert alpha == pytest.approx(math.sqrt(2 * math.log(100.0) / 120))
        assert bound == lp.kappa_bound(alpha, 120, 60, 0.5)


class TestBuildPreconditioner:
    def test_orthonormal_columns_bounded(self):
        rng = np.random.default_rng(2)
        Q = np.linalg.qr(rng.standard_normal((5000, 60)))[0]
        A = lp.SparseMatrix.from_dense(Q)
        hits = 0
        for seed in range(20):
            pre = lp.build_preconditioner(A, seed=seed)
            if measured_kappa(Q, pre.N) <= pre.cert["kappa_bound"]:
                hits += 1
        assert hits >= 19

    def test_conditioning_independence(self):
        # kappa(AN) stays in the same band whether kappa(A) is 1e2 or 1e10
        kappas = {}
        for ratio in (1e-2, 1e-10):
            dense = lp.generate_fixed_spectrum(4000, 60, lp.preset_spectrum("linspace", 60, ratio), seed=7)
            A = lp.SparseMatrix.from_dense(dense)
            vals = [measured_kappa(dense, lp.build_preconditioner(A, seed=s).N) for s in range(10)]
            kappas[ratio] = np.mean(vals)
        assert 0.5 <= kappas[1e-2] / kappas[1e-10] <= 2.0

    def test_shape_contract(self):
        A = random_dense_sparse(4000, 60, seed=1)
        pre = lp.build_preconditioner(A, seed=0)
        assert pre.cert["m"] == 120
        assert pre.N.shape == (60, pre.k) and pre.k <= 60

    def test_qr_and_svd_agree(self):
        dense = lp.generate_fixed_spectrum(3000, 40, lp.preset_spectrum("linspace", 40, 1e-6), seed=3)
        A = lp.SparseMatrix.from_dense(dense)
        for seed in range(5):
            k_svd = measured_kappa(dense, lp.build_preconditioner(A, seed=seed).N)
            k_qr = measured_kappa(dense, lp.build_preconditioner(A, seed=seed, method="qr").N)
            assert abs(k_svd - k_qr) <= 1e-6 * k_svd

    def test_zero_matrix_rejected(self):
        A = lp.SparseMatrix.from_dense(np.zeros((200, 5)))
        with pytest.raises(NumericalError, match="zero matrix"):
            lp.build_preconditioner(A, seed=0)

    def test_spectrum_equivalence_with_shared_draws(self):
        # singular values of AN match the inverted spectrum of the sketched basis
        rng = np.random.default_rng(4)
        dense = lp.generate_fixed_spectrum(3000, 30, lp.preset_spectrum("linspace", 30, 1e-3), seed=5)
        A = lp.SparseMatrix.from_dense(dense)
        seed = 21
        pre = lp.build_preconditioner(A, seed=seed)
        U = np.linalg.svd(dense, full_matrices=False)[0]
        GSU = lp.countgauss_sketch(lp.SparseMatrix.from_dense(U), seed=seed)
        sv_an = np.sort(np.linalg.svd(dense @ pre.N, compute_uv=False))[::-1]
        sv_inv = np.sort(1.0 / np.linalg.svd(GSU, compute_uv=False))[::-1]
        assert np.abs(sv_an - sv_inv).max() <= 1e-8 * sv_an.max()

    def test_bound_holds_at_high_confidence(self):
        # delta and alpha chosen so the certified success probability is 0.97
        d, gamma, eps, delta = 40, 3.0, 0.5, 0.01
        dense = lp.generate_fixed_spectrum(4000, d, lp.preset_spectrum("linspace", d, 1e-4), seed=9)
        A = lp.SparseMatrix.from_dense(dense)
        m = math.ceil(gamma * d)
        alpha = math.sqrt(2.0 * math.log(2.0 / 0.02) / m)
        assert (1 - delta) * (1 - 2 * math.exp(-alpha * alpha * m / 2)) >= 0.97
        bound = lp.kappa_bound(alpha, m, d, eps)
        hits = 0
        for seed in range(20):
            pre = lp.build_preconditioner(A, gamma=gamma, delta=delta, eps=eps, seed=seed)
            if measured_kappa(dense, pre.N) <= bound:
                hits += 1
        assert hits >= 19


class TestLsqr:
    def test_consistent_system(self):
        rng = np.random.default_rng(0)
        dense = lp.generate_fixed_spectrum(3000, 40, lp.preset_spectrum("linspace", 40, 1e-3), seed=2)
        A = lp.SparseMatrix.from_dense(dense)
        x_star = rng.standard_normal(40)
        b = dense @ x_star
        pre = lp.build_preconditioner(A, seed=9)
        res = lp.lsqr_preconditioned(A, pre, b, tol=1e-12)
        assert res.converged
        assert np.linalg.norm(res.x - x_star) <= 1e-8 * np.linalg.norm(x_star)

    def test_precondition_speeds_up_ill_conditioned_solve(self):
        rng = np.random.default_rng(1)
        dense = lp.generate_fixed_spectrum(5000, 60, lp.preset_spectrum("linspace", 60, 1e-8), seed=11)
        A = lp.SparseMatrix.from_dense(dense)
        b = dense @ rng.standard_normal(60)
        pre = lp.build_preconditioner(A, seed=5)
        fast = lp.lsqr_preconditioned(A, pre, b, tol=1e-10, max_iter=2000)
        slow = lp.lsqr_preconditioned(A, lp.identity_preconditioner(60), b, tol=1e-10, max_iter=2000)
        assert fast.converged
        # the win is the iteration-count ratio, not an absolute count
        assert slow.iterations >= 1.5 * fast.iterations

    def test_orthogonal_rhs_gives_zero_solution(self):
        rng = np.random.default_rng(3)
        dense = lp.generate_fixed_spectrum(2000, 20, lp.preset_spectrum("linspace", 20, 1e-2), seed=4)
        A = lp.SparseMatrix.from_dense(dense)
        Q = np.linalg.qr(dense)[0]
        b = rng.standard_normal(2000)
        b -= Q @ (Q.T @ b)
        pre = lp.build_preconditioner(A, seed=2)
        res = lp.lsqr_preconditioned(A, pre, b, tol=1e-10)
        assert np.linalg.norm(res.x) <= 1e-10 * np.linalg.norm(b) * np.linalg.norm(pre.N)

    def test_residual_history_monotone(self):
        rng = np.random.default_rng(5)
        dense = rng.standard_normal((800, 15))
        A = lp.SparseMatrix.from_dense(dense)
        b = rng.standard_normal(800)
        pre = lp.build_preconditioner(A, seed=1)
        res = lp.lsqr_preconditioned(A, pre, b, tol=1e-12, max_iter=100)
        h = res.residual_history
        assert np.all(np.diff(h) <= 1e-12 * h[0])

    def test_max_iter_reached_reports_not_converged(self):
        rng = np.random.default_rng(6)
        dense = lp.generate_fixed_spectrum(2000, 30, lp.preset_spectrum("linspace", 30, 1e-9), seed=8)
        A = lp.SparseMatrix.from_dense(dense)
        b = rng.standard_normal(2000)
        res = lp.lsqr_preconditioned(A, lp.identity_preconditioner(30), b, tol=1e-14, max_iter=3)
        assert not res.converged and res.iterations == 3

    def test_zero_rhs(self):
        A = random_dense_sparse(100, 6, seed=7)
        pre = lp.build_preconditioner(A, seed=0)
        res = lp.lsqr_preconditioned(A, pre, np.zeros(100), tol=1e-10)
        assert res.converged and np.all(res.x == 0.0)
