import numpy as np
import pytest

import lspack as lp


def svd_leverage_oracle(dense: np.ndarray, k: int | None = None) -> np.ndarray:
    """Brute-force scores: squared row norms of the top-k left singular vectors."""
    U, s, _ = np.linalg.svd(np.asarray(dense, dtype=np.float64), full_matrices=False)
    if k is None:
        k = int(np.sum(s > s[0] * 1e-12)) if s.size else 0
    Uk = U[:, :k]
    return np.einsum("ij,ij->i", Uk, Uk)


def random_sparse(n: int, d: int, nnz_per_row: int, seed: int) -> lp.SparseMatrix:
    return lp.generate_sparse_random(n, d, nnz_per_row, seed)


def random_dense_sparse(n: int, d: int, seed: int) -> lp.SparseMatrix:
    rng = np.random.default_rng(seed)
    return lp.SparseMatrix.from_dense(rng.standard_normal((n, d)))


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests measure math, not JIT."""
    A = lp.SparseMatrix.from_dense(np.eye(3))
    lp.gram(A)
    B = np.ones((3, 2))
    lp.product_row_norms(A, B, force_path="direct")
    lp.product_row_norms(A, B, force_path="gram")
    lp.apply_countsketch(A, lp.countsketch_plan(3, 4, 0))
    A.matvec(np.ones(3))
    A.rmatvec(np.ones(3))
    from lspack.bench import gaussian_premultiply
    gaussian_premultiply(A, 2, 0)
    yield


@pytest.fixture(scope="session")
def fixed_svd_1e7_5000():
    dense = lp.generate_fixed_spectrum(5000, 60, lp.preset_spectrum("fixed_svd_1e7"), seed=3)
    return dense, lp.SparseMatrix.from_dense(dense)


@pytest.fixture(scope="session")
def fixed_svd_25e3_50000():
    dense = lp.generate_fixed_spectrum(50000, 60, lp.preset_spectrum("fixed_svd_2.5e4"), seed=3)
    return dense, lp.SparseMatrix.from_dense(dense)


@pytest.fixture(scope="session")
def kl02_gap_5000():
    dense = lp.generate_fixed_spectrum(5000, 71, lp.preset_spectrum("kl02_gap"), seed=3)
    return dense, lp.SparseMatrix.from_dense(dense)


@pytest.fixture(autouse=True)
def reset_config():
    yield
    lp.set_strict(False)
    lp.set_threads(8)
