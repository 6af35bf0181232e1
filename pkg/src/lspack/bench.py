"""Benchmark and experiment-replication suites behind ``lspack bench``.

Each suite returns plot-ready rows (list of dicts with a fixed column
order) that the CLI serializes to CSV.
"""

from __future__ import annotations

import math
import time

import numpy as np

from ._kernels import dense_csr_matmul
from .matrix import SparseMatrix, generate_fixed_spectrum, generate_sparse_random, gram, preset_spectrum
from .precond import build_preconditioner, kappa_certificate
from .rankrevealing import detect_rank_qr, detect_rank_svd, pivoted_qr
from .rng import ROLE_GAUSSIAN, substream
from .sketch import apply_countsketch, countgauss_sketch, countsketch_plan

SUITES = ("sketch_timing", "precond_sweep", "rank_detect", "ls_accuracy")


def _timed(fn, reps: int) -> tuple[float, float, float]:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), sum(times) / len(times), max(times)


def gaussian_premultiply(A: SparseMatrix, m: int, seed: int, batch_rows: int = 16) -> np.ndarray:
    """G @ A for sparse A, streaming G in row batches (generation included)."""
    g = substream(seed, ROLE_GAUSSIAN)
    out = np.empty((m, A.n_cols))
    for lo in range(0, m, batch_rows):
        hi = min(m, lo + batch_rows)
        G = g.standard_normal((hi - lo, A.n_rows))
        out[lo:hi] = dense_csr_matmul(G, A.row_offsets, A.col_indices, A.values, A.n_cols)
    return out


def suite_sketch_timing(n: int = 1_000_000, d: int = 64, nnz_per_row: int = 20,
                        seeds: int = 3, reps: int = 1) -> list[dict]:
    A = generate_sparse_random(n, d, nnz_per_row, seed=0)
    m = 2 * d
    r = 10 * d
    rows = []
    for seed in range(seeds):
        plan = countsketch_plan(n, r, seed)
        ops = {
            "SA": (lambda: apply_countsketch(A, plan), m, r),
            "GA": (lambda: gaussian_premultiply(A, m, seed), m, n),
            "GSA": (lambda: countgauss_sketch(A, gamma=2.0, seed=seed, r_override=r), m, r),
            "gram": (lambda: gram(A), d, d),
        }
        for op, (fn, om, orr) in ops.items():
            tmin, tavg, tmax = _timed(fn, reps)
            rows.append({"op": op, "seed": seed, "m": om, "r": orr,
                         "t_min": tmin, "t_avg": tavg, "t_max": tmax})
    return rows


def suite_precond_sweep(n: int = 5000, d: int = 60, seeds: int = 20,
                        ratios: tuple = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10),
                        eps: float = 0.5, gamma: float = 2.0) -> list[dict]:
    rows = []
    for ratio in ratios:
        dense = generate_fixed_spectrum(n, d, preset_spectrum("linspace", d, ratio), seed=7)
        A = SparseMatrix.from_dense(dense)
        kappas = []
        for seed in range(seeds):
            pre = build_preconditioner(A, gamma=gamma, eps=eps, seed=seed)
            sv = np.linalg.svd(dense @ pre.N, compute_uv=False)
            kappas.append(sv[0] / sv[-1])
        kappas = np.asarray(kappas)
        m = math.ceil(gamma * d)
        _, bound = kappa_certificate(m, d, eps)
        rows.append({"kappa_A": 1.0 / ratio, "kappa_AN_min": kappas.min(),
                     "kappa_AN_mean": kappas.mean(), "kappa_AN_max": kappas.max(),
                     "bound": bound, "seeds": seeds})
    return rows


def rank_success_counts(A: SparseMatrix, true_k: int, zeta: float, seeds: int,
                        gamma: float = 2.0) -> dict:
    """How often the sketched singular values / QR diagonal recover the rank."""
    d = A.n_cols
    m = math.ceil(gamma * d)
    ga_ok = gsa_ok = qr_ok = 0
    for seed in range(seeds):
        GA = gaussian_premultiply(A, m, seed, batch_rows=m)
        if detect_rank_svd(np.linalg.svd(GA, compute_uv=False), zeta) == true_k:
            ga_ok += 1
        GSA = countgauss_sketch(A, gamma=gamma, seed=seed)
        if detect_rank_svd(np.linalg.svd(GSA, compute_uv=False), zeta) == true_k:
            gsa_ok += 1
        _, R = pivoted_qr(GSA)
        if detect_rank_qr(np.abs(np.diag(R)), zeta) == true_k:
            qr_ok += 1
    return {"ga_ok": ga_ok, "gsa_ok": gsa_ok, "gsa_qr_ok": qr_ok, "seeds": seeds}


def suite_rank_detect(n: int = 5000, seeds: int = 20) -> list[dict]:
    rows = []
    cases = [
        ("fixed_svd_1e7", preset_spectrum("fixed_svd_1e7"), 60, 30, 10 ** -6.5),
        ("kl02_gap", preset_spectrum("kl02_gap"), 71, 64, 1e-10),
    ]
    for name, spec, d, true_k, zeta in cases:
        A = SparseMatrix.from_dense(generate_fixed_spectrum(n, d, spec, seed=3))
        counts = rank_success_counts(A, true_k, zeta, seeds)
        rows.append({"matrix": name, "true_k": true_k, "zeta": zeta, **counts})
    return rows


def suite_ls_accuracy(n: int = 20000, d: int = 32, seeds: int = 10) -> list[dict]:
    from .leverage import leverage_gram_svd, leverage_sketched
    from .sketch import SketchSpec
    dense = substream(11, ROLE_GAUSSIAN).standard_normal((n, d))
    A = SparseMatrix.from_dense(dense)
    exact = leverage_gram_svd(A).scores
    rows = []
    for seed in range(seeds):
        spec = SketchSpec("countgauss", m=2 * d, r=10 * d, seed=seed)
        t0 = time.perf_counter()
        approx = leverage_sketched(A, spec).scores
        dt = time.perf_counter() - t0
        rel = np.abs(approx - exact) / np.maximum(exact, 1e-300)
        rows.append({"seed": seed, "max_rel_err": rel.max(),
                     "frac_within_50pct": float(np.mean(rel <= 0.5)), "t_sketched": dt})
    return rows


def run_suite(name: str, **kwargs) -> list[dict]:
    if name == "sketch_timing":
        return suite_sketch_timing(**kwargs)
    if name == "precond_sweep":
        return suite_precond_sweep(**kwargs)
    if name == "rank_detect":
        return suite_rank_detect(**kwargs)
    if name == "ls_accuracy":
        return suite_ls_accuracy(**kwargs)
    raise ValueError(f"unknown bench suite {name!r}")
