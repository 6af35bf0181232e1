"""lspack: randomized sketching, leverage scores, rank estimation and
least-squares preconditioning for tall-and-thin sparse/dense matrices."""

from .config import set_strict, set_threads, strict_mode
from .errors import FormatError, LspackError, MemoryBudgetError, NumericalError
from .io import (read_dense_binary, read_matrix, read_matrix_market, write_dense_binary,
                 write_matrix_market)
from .leverage import (LeverageScores, hrn_approx_bound, hrn_exact_bound, leverage_gram_svd,
                       leverage_hrn_approx, leverage_hrn_exact, leverage_sketched, leverage_spqr)
from .matrix import (SparseMatrix, SpectrumSpec, generate_fixed_spectrum, generate_sparse_random,
                     gram, nnz2, preset_spectrum, product_row_norms, select_columns)
from .precond import (LsqrResult, Preconditioner, build_preconditioner, identity_preconditioner,
                      kappa_bound, kappa_certificate, lsqr_preconditioned)
from .rankrevealing import (ColumnSubset, RankReport, countgauss_srrqr, detect_rank_qr,
                            detect_rank_svd, pivoted_qr, subset_sigma_min_bound)
from .sketch import (CountSketchPlan, SketchSpec, apply_countsketch, apply_gaussian, apply_sketch,
                     apply_srht, countgauss_sketch, countsketch_plan, countsketch_rows,
                     gaussian_jlt_rows, gaussian_ose_rows, hadamard_transform, srht_countsketch,
                     srht_rows)

__version__ = "0.1.0"
