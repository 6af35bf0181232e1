"""Runtime knobs: worker thread count and strict-sequential mode.

Threads control the internal parallelism of the CSR kernels (Gram, row
norms, sketch application).  Results are deterministic for a fixed thread
count; they may differ across thread counts only by floating-point
reassociation in the Gram block merge.  Strict mode forces every kernel
onto its single-block sequential path so that outputs are bitwise
reproducible regardless of the thread setting.
"""

from __future__ import annotations

import os

import numba

_strict: bool = False

# Dense intermediates (CountSketch output, Gaussian batches) are capped at
# this many bytes unless the caller overrides it.
DEFAULT_MEMORY_BUDGET: int = 1 << 30


def set_threads(n: int) -> None:
    ceiling = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(min(ceiling, max(1, int(n))))


def get_threads() -> int:
    return int(numba.get_num_threads())


def set_strict(flag: bool) -> None:
    global _strict
    _strict = bool(flag)


def strict_mode() -> bool:
    return _strict


def worker_blocks(n_items: int) -> int:
    """Number of row blocks a reduction kernel should use."""
    if _strict or n_items <= 1:
        return 1
    return max(1, min(get_threads(), n_items))


def _init_from_env() -> None:
    raw = os.environ.get("LSPACK_THREADS")
    if raw:
        try:
            set_threads(int(raw))
        except ValueError:
            pass


_init_from_env()
