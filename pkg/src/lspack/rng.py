"""Seedable counter-based random streams.

Every randomized operation draws from a Philox (counter-based) generator
keyed by ``(seed, role)``, so the CountSketch plan, the Gaussian block,
the SRHT signs/sample and any JLT draw are mutually independent streams
that are reproducible across runs and thread counts.  Normal deviates
come from numpy's Ziggurat; the traversal order of every draw is fixed
and documented at the call site.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

ROLE_COUNTSKETCH = 1
ROLE_GAUSSIAN = 2
ROLE_SRHT = 3
ROLE_JLT = 4
ROLE_GENERATOR = 5
ROLE_ENTROPY = 6


def substream(seed: int, role: int) -> np.random.Generator:
    """Independent generator for (seed, role)."""
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=(int(role),))
    return np.random.Generator(np.random.Philox(ss))


def random_seed() -> int:
    """Fresh entropy-based seed (used by the CLI's --seed random)."""
    return int(np.random.SeedSequence().entropy & _MASK64)
