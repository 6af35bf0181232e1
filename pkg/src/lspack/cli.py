"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 input format error, 4 numerical
failure.  Every JSON output carries schema_version and echoes the seed;
in strict mode wall-clock fields are omitted so outputs are byte-identical
across runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import config, io
from .bench import SUITES, run_suite
from .errors import FormatError, LspackError, NumericalError
from .leverage import (METHODS, leverage_gram_svd, leverage_hrn_approx, leverage_hrn_exact,
                       leverage_sketched, leverage_spqr)
from .matrix import SparseMatrix, SpectrumSpec, generate_fixed_spectrum, generate_sparse_random, preset_spectrum
from .precond import build_preconditioner
from .rankrevealing import RankReport, countgauss_srrqr, detect_rank_qr, detect_rank_svd, pivoted_qr
from .rng import random_seed
from .sketch import SKETCH_KINDS, SketchSpec, apply_sketch
from .bench import gaussian_premultiply

SCHEMA_VERSION = 1


def _emit(payload: dict, args) -> None:
    payload["schema_version"] = SCHEMA_VERSION
    payload["seed"] = getattr(args, "seed_value", None)
    if config.strict_mode():
        payload.pop("wall_time_s", None)
    print(json.dumps(payload, sort_keys=True))


def _parse_seed(raw: str) -> int:
    if raw == "random":
        return random_seed()
    return int(raw)


def _load(args) -> SparseMatrix:
    return io.read_matrix(args.input)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", default="42", help="integer seed, or 'random'")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--strict", action="store_true", help="sequential deterministic mode")
    p.add_argument("--rcond", type=float, default=1e-10, help="numerical-rank cutoff")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=1.0 / 3.0)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lspack")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic matrix")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, default=60)
    g.add_argument("--preset", default=None,
                   help="fixed_svd_1e7 | fixed_svd_2.5e4 | kl02_gap | linspace")
    g.add_argument("--ratio", type=float, default=None, help="smallest singular value for linspace")
    g.add_argument("--spectrum", default=None, help="explicit comma-separated singular values")
    g.add_argument("--sparse-nnz", type=int, default=None,
                   help="emit a random sparse matrix with this many nonzeros per row")
    g.add_argument("--output", required=True)
    _add_common(g)

    s = sub.add_parser("sketch", help="sketch a matrix")
    s.add_argument("--input", required=True)
    s.add_argument("--kind", choices=SKETCH_KINDS, default="countgauss")
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--r", type=int, default=None)
    s.add_argument("--output", required=True)
    _add_common(s)

    r = sub.add_parser("rank", help="estimate the numerical rank")
    r.add_argument("--input", required=True)
    r.add_argument("--method", choices=("gsa", "ga", "svd", "qr"), default="gsa")
    _add_common(r)

    c = sub.add_parser("colselect", help="select linearly independent columns")
    c.add_argument("--input", required=True)
    _add_common(c)

    l = sub.add_parser("leverage", help="compute leverage scores")
    l.add_argument("--input", required=True)
    l.add_argument("--method", choices=tuple(m.replace("_", "-") for m in METHODS),
                   default="gram-svd")
    l.add_argument("--m", type=int, default=None, help="sketch rows for method=sketched")
    l.add_argument("--r", type=int, default=None, help="inner sketch rows for method=sketched")
    l.add_argument("--output", default=None, help="write scores here (json or csv)")
    _add_common(l)

    p = sub.add_parser("precond", help="build a right preconditioner")
    p.add_argument("--input", required=True)
    p.add_argument("--factor", choices=("svd", "qr"), default="svd")
    p.add_argument("--output", default=None, help="write N as dense binary")
    p.add_argument("--verify", action="store_true", help="measure kappa(AN) densely")
    _add_common(p)

    b = sub.add_parser("bench", help="run an experiment suite")
    b.add_argument("--suite", choices=SUITES, required=True)
    b.add_argument("--n", type=int, default=None)
    b.add_argument("--d", type=int, default=None)
    b.add_argument("--seeds", type=int, default=None)
    b.add_argument("--output", required=True)
    _add_common(b)
    return ap


def cmd_gen(args) -> None:
    seed = args.seed_value
    if args.sparse_nnz is not None:
        A = generate_sparse_random(args.n, args.d, args.sparse_nnz, seed)
        io.write_matrix_market(A, args.output)
        _emit({"command": "gen", "n": args.n, "d": args.d, "nnz": A.nnz,
               "output": args.output}, args)
        return
    if args.spectrum:
        spec = SpectrumSpec(tuple(float(x) for x in args.spectrum.split(",")))
    elif args.preset:
        spec = preset_spectrum(args.preset, args.d, args.ratio)
    else:
        raise FormatError("gen needs --preset or --spectrum (or --sparse-nnz)")
    if len(spec) > args.d:
        raise FormatError(f"spectrum has {len(spec)} values but d={args.d}")
    dense = generate_fixed_spectrum(args.n, args.d, spec, seed)
    sv = np.linalg.svd(dense, compute_uv=False)
    achieved = float(sv[0] / sv[len(spec) - 1])
    if str(args.output).endswith(".bin"):
        io.write_dense_binary(dense, args.output)
    else:
        io.write_matrix_market(SparseMatrix.from_dense(dense), args.output)
    _emit({"command": "gen", "n": args.n, "d": args.d, "kappa2": achieved,
           "output": args.output}, args)


def cmd_sketch(args) -> None:
    A = _load(args)
    spec = SketchSpec(args.kind, m=args.m, r=args.r, seed=args.seed_value,
                      eps=args.eps, delta=args.delta, gamma=args.gamma)
    t0 = time.perf_counter()
    At = apply_sketch(A, spec)
    wall = time.perf_counter() - t0
    io.write_dense_binary(At, args.output)
    _emit({"command": "sketch", "spec": json.loads(spec.to_json()),
           "out_shape": list(At.shape), "output": args.output, "wall_time_s": wall}, args)


def cmd_rank(args) -> None:
    A = _load(args)
    zeta = args.rcond
    seed = args.seed_value
    if args.method == "gsa":
        _, report = countgauss_srrqr(A, gamma=args.gamma, eps=args.eps, delta=args.delta,
                                     zeta=zeta, seed=seed)
    elif args.method == "ga":
        GA = gaussian_premultiply(A, math.ceil(args.gamma * A.n_cols), seed)
        sigma = np.linalg.svd(GA, compute_uv=False)
        report = RankReport(detect_rank_svd(sigma, zeta), "svd_cutoff", zeta, sigma)
    elif args.method == "svd":
        sigma = np.linalg.svd(A.to_dense(), compute_uv=False)
        report = RankReport(detect_rank_svd(sigma, zeta), "svd_cutoff", zeta, sigma)
    else:
        _, R = pivoted_qr(A.to_dense())
        diag = np.abs(np.diag(R))
        report = RankReport(detect_rank_qr(diag, zeta), "qr_diag", zeta, diag)
    _emit({"command": "rank", "method": args.method, "report": json.loads(report.to_json())}, args)


def cmd_colselect(args) -> None:
    A = _load(args)
    subset, report = countgauss_srrqr(A, gamma=args.gamma, eps=args.eps, delta=args.delta,
                                      zeta=args.rcond, seed=args.seed_value)
    _emit({"command": "colselect", "subset": json.loads(subset.to_json()),
           "report": json.loads(report.to_json())}, args)


def cmd_leverage(args) -> None:
    A = _load(args)
    method = args.method.replace("-", "_")
    seed = args.seed_value
    t0 = time.perf_counter()
    if method == "gram_svd":
        result = leverage_gram_svd(A, args.rcond)
    elif method == "spqr":
        result = leverage_spqr(A, args.rcond)
    elif method == "hrn_exact":
        result = leverage_hrn_exact(A, args.rcond, seed)
    elif method == "hrn_approx":
        result = leverage_hrn_approx(A, args.rcond, args.eps, seed)
    else:
        spec = SketchSpec("countgauss", m=args.m, r=args.r, seed=seed,
                          eps=args.eps, delta=args.delta, gamma=args.gamma)
        result = leverage_sketched(A, spec, seed=seed)
    wall = time.perf_counter() - t0
    if args.output:
        if args.format == "csv" or str(args.output).endswith(".csv"):
            result.to_csv(args.output)
        else:
            with open(args.output, "w", encoding="ascii") as f:
                f.write(result.to_json() + "\n")
    summary = {"command": "leverage", "method": args.method, "k": result.k,
               "sum": float(result.scores.sum()), "coherence": result.coherence,
               "wall_time_s": wall}
    if method == "hrn_approx" and result.k:
        m_sel = math.ceil(args.gamma * A.n_cols)
        summary["bound_inputs"] = {
            "k": result.k, "d": A.n_cols, "m": m_sel, "eps": args.eps,
            "eps_tilde": 3.0 * args.eps, "phi": 2.0,
            "alpha": math.sqrt(2.0 * math.log(100.0) / m_sel),
            "sketch_m": result.params.get("m"), "sketch_r": result.params.get("r"),
        }
    _emit(summary, args)


def cmd_precond(args) -> None:
    A = _load(args)
    pre = build_preconditioner(A, gamma=args.gamma, delta=args.delta, eps=args.eps,
                               zeta=args.rcond, seed=args.seed_value, method=args.factor)
    if args.output:
        io.write_dense_binary(pre.N, args.output)
    bound = pre.cert["kappa_bound"]
    cert = {"command": "precond", "k": pre.k, "m": pre.cert["m"], "alpha": pre.cert["alpha"],
            "eps": pre.cert["eps"],
            "kappa_bound": bound if math.isfinite(bound) else None}
    if args.verify:
        AN = A.to_dense() @ pre.N
        sv = np.linalg.svd(AN, compute_uv=False)
        cert["kappa_measured"] = float(sv[0] / sv[-1])
    _emit(cert, args)


def cmd_bench(args) -> None:
    kwargs = {}
    if args.n is not None:
        kwargs["n"] = args.n
    if args.d is not None:
        kwargs["d"] = args.d
    if args.seeds is not None:
        kwargs["seeds"] = args.seeds
    rows = run_suite(args.suite, **kwargs)
    with open(args.output, "w", newline="", encoding="ascii") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    _emit({"command": "bench", "suite": args.suite, "rows": len(rows),
           "output": args.output}, args)


_DISPATCH = {"gen": cmd_gen, "sketch": cmd_sketch, "rank": cmd_rank, "colselect": cmd_colselect,
             "leverage": cmd_leverage, "precond": cmd_precond, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        config.set_threads(args.threads)
    config.set_strict(bool(args.strict))
    try:
        args.seed_value = _parse_seed(args.seed)
    except ValueError:
        print("error: --seed must be an integer or 'random'", file=sys.stderr)
        return 2
    try:
        _DISPATCH[args.command](args)
    except (FormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (NumericalError, LspackError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    finally:
        config.set_strict(False)
    return 0


if __name__ == "__main__":
    sys.exit(main())
