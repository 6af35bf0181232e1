import numpy as np
import pytest

import lspack as lp
from lspack.errors import FormatError

from conftest import random_sparse


class TestSparseMatrix:
    def test_from_dense_round_trip(self):
        rng = np.random.default_rng(0)
        D = np.where(rng.random((40, 7)) < 0.4, rng.standard_normal((40, 7)), 0.0)
        A = lp.SparseMatrix.from_dense(D)
        assert np.array_equal(A.to_dense(), D)

    def test_from_coo_merges_duplicates_and_drops_zeros(self):
        A = lp.SparseMatrix.from_coo(2, 2, [0, 0, 1, 1], [1, 1, 0, 0], [2.0, 3.0, 1.0, -1.0])
        assert A.nnz == 1
        assert A.to_dense()[0, 1] == 5.0

    def test_transpose_round_trip(self):
        A = random_sparse(30, 9, 4, seed=1)
        assert np.array_equal(A.transpose().transpose().to_dense(), A.to_dense())

    def test_rejects_explicit_zero(self):
        with pytest.raises(FormatError):
            lp.SparseMatrix(1, 2, np.array([0, 1]), np.array([0]), np.array([0.0]))

    def test_rejects_unsorted_columns(self):
        with pytest.raises(FormatError):
            lp.SparseMatrix(1, 3, np.array([0, 2]), np.array([2, 0]), np.array([1.0, 1.0]))

    def test_rejects_bad_offsets(self):
        with pytest.raises(FormatError):
            lp.SparseMatrix(2, 2, np.array([0, 2, 1]), np.array([0, 1]), np.array([1.0, 1.0]))


class TestNnz2:
    def test_identity(self):
        assert lp.nnz2(lp.SparseMatrix.from_dense(np.eye(3))) == 3

    def test_dense_formula(self):
        D = np.arange(1.0, 21.0).reshape(4, 5)
        assert lp.nnz2(lp.SparseMatrix.from_dense(D)) == 4 * 25

    def test_dense_formula_random_shapes(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            n, d = rng.integers(2, 30), rng.integers(1, 12)
            A = lp.SparseMatrix.from_dense(rng.random((n, d)) + 0.5)
            assert lp.nnz2(A) == n * d * d

    def test_fixed_nnz_per_row(self):
        A = random_sparse(100, 10, 5, seed=7)
        # per-row count oracle
        assert lp.nnz2(A) == int(np.sum(np.diff(A.row_offsets) ** 2)) == 100 * 25


class TestGram:
    def test_orthonormal_columns(self):
        A = lp.SparseMatrix.from_dense(np.vstack([np.eye(6), np.zeros((10, 6))]))
        assert np.array_equal(lp.gram(A), np.eye(6))

    def test_matches_naive_triple_loop(self):
        rng = np.random.default_rng(11)
        D = rng.standard_normal((200, 20))
        A = lp.SparseMatrix.from_dense(D)
        expected = np.zeros((20, 20))
        for j in range(20):
            for k in range(20):
                acc = 0.0
                for i in range(200):
                    acc += D[i, j] * D[i, k]
                expected[j, k] = acc
        B = lp.gram(A)
        assert np.linalg.norm(B - expected) <= 1e-12 * np.linalg.norm(expected)

    def test_random_instances_match_dense(self):
        rng = np.random.default_rng(5)
        for seed in range(6):
            n = int(rng.integers(50, 500))
            d = int(rng.integers(2, 30))
            A = random_sparse(n, d, min(d, 5), seed=seed)
            D = A.to_dense()
            B = lp.gram(A)
            assert np.linalg.norm(B - D.T @ D) <= 1e-12 * max(np.linalg.norm(D.T @ D), 1e-300)
            assert np.array_equal(B, B.T)

    def test_generator_eigenvalues(self):
        spec = lp.SpectrumSpec((2.0, 1.0, 0.25, 0.125))
        dense = lp.generate_fixed_spectrum(300, 4, spec, seed=2)
        w = np.linalg.eigvalsh(lp.gram(lp.SparseMatrix.from_dense(dense)))[::-1]
        expected = np.asarray(spec.singular_values) ** 2
        assert np.all(np.abs(w - expected) <= 1e-8 * expected)


class TestProductRowNorms:
    def test_identity_matrix_selects_b_rows(self):
        n = 9
        A = lp.SparseMatrix.from_dense(np.eye(n))
        B = np.random.default_rng(0).standard_normal((n, 4))
        out = lp.product_row_norms(A, B)
        assert np.allclose(out, (B ** 2).sum(axis=1), rtol=0, atol=1e-14)

    def test_b_identity_gives_row_norms(self):
        A = random_sparse(50, 8, 3, seed=2)
        out = lp.product_row_norms(A, np.eye(8))
        D = A.to_dense()
        assert np.allclose(out, (D ** 2).sum(axis=1), rtol=1e-12)

    def test_matches_dense_oracle(self):
        A = random_sparse(300, 12, 4, seed=9)
        B = np.random.default_rng(1).standard_normal((12, 4))
        expected = ((A.to_dense() @ B) ** 2).sum(axis=1)
        out = lp.product_row_norms(A, B)
        scale = max(expected.max(), 1e-300)
        assert np.abs(out - expected).max() <= 1e-12 * scale

    def test_both_paths_agree(self):
        rng = np.random.default_rng(4)
        for seed in range(5):
            A = random_sparse(int(rng.integers(20, 200)), int(rng.integers(3, 15)), 3, seed=seed)
            B = rng.standard_normal((A.n_cols, int(rng.integers(1, 6))))
            direct = lp.product_row_norms(A, B, force_path="direct")
            viagram = lp.product_row_norms(A, B, force_path="gram")
            scale = max(direct.max(), 1e-300)
            assert np.abs(direct - viagram).max() <= 1e-12 * scale

    def test_dimension_mismatch(self):
        A = random_sparse(10, 5, 2, seed=0)
        with pytest.raises(ValueError):
            lp.product_row_norms(A, np.ones((4, 2)))


class TestSelectColumns:
    def test_identity_permutation(self):
        A = random_sparse(20, 6, 3, seed=3)
        B = lp.select_columns(A, np.arange(6))
        assert np.array_equal(B.to_dense(), A.to_dense())

    def test_swap(self):
        D = np.array([[1.0, 2.0, 3.0], [0.0, 4.0, 0.0]])
        A = lp.SparseMatrix.from_dense(D)
        B = lp.select_columns(A, [2, 0])
        assert np.array_equal(B.to_dense(), D[:, [2, 0]])

    def test_empty_selection(self):
        A = random_sparse(15, 4, 2, seed=1)
        B = lp.select_columns(A, [])
        assert B.shape == (15, 0) and B.nnz == 0

    def test_errors(self):
        A = random_sparse(10, 4, 2, seed=0)
        with pytest.raises(ValueError):
            lp.select_columns(A, [0, 0])
        with pytest.raises(ValueError):
            lp.select_columns(A, [4])


class TestGenerator:
    def test_rank_one(self):
        dense = lp.generate_fixed_spectrum(5, 1, lp.SpectrumSpec((1.0,)), seed=0)
        assert abs(np.linalg.norm(dense) - 1.0) <= 1e-12

    def test_singular_values_match(self):
        spec = lp.SpectrumSpec(tuple(np.linspace(3.0, 0.001, 12)))
        dense = lp.generate_fixed_spectrum(400, 12, spec, seed=5)
        sv = np.linalg.svd(dense, compute_uv=False)
        expected = np.asarray(spec.singular_values)
        assert np.abs(sv - expected).max() <= 1e-10 * expected.max()

    def test_factors_orthonormal(self):
        # flat spectrum: A^T A = I exactly when both factors are orthonormal
        dense = lp.generate_fixed_spectrum(200, 8, lp.SpectrumSpec((1.0,) * 8), seed=1)
        assert np.abs(dense.T @ dense - np.eye(8)).max() <= 1e-12

    def test_fixed_svd_1e7_condition(self):
        dense = lp.generate_fixed_spectrum(50000, 60, lp.preset_spectrum("fixed_svd_1e7"), seed=0)
        sv = np.linalg.svd(dense, compute_uv=False)
        assert abs(sv[0] / sv[-1] - 1e7) <= 1e-3 * 1e7

    def test_fixed_svd_25e3_condition(self):
        spec = lp.preset_spectrum("fixed_svd_2.5e4")
        assert spec.cond == pytest.approx(2.5e4)
        dense = lp.generate_fixed_spectrum(2000, 60, spec, seed=0)
        sv = np.linalg.svd(dense, compute_uv=False)
        assert sv[0] / sv[-1] == pytest.approx(2.5e4, rel=1e-6)

    def test_spectrum_validation(self):
        with pytest.raises(ValueError):
            lp.SpectrumSpec((1.0, 2.0))
        with pytest.raises(ValueError):
            lp.SpectrumSpec((1.0, 0.0))
        with pytest.raises(ValueError):
            lp.generate_fixed_spectrum(3, 5, lp.SpectrumSpec((1.0,)), seed=0)


def test_sparse_random_shape_and_rows():
    A = random_sparse(500, 20, 7, seed=4)
    assert A.shape == (500, 20)
    assert np.all(np.diff(A.row_offsets) == 7)
