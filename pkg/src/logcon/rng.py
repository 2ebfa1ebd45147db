"""Counter-based, splittable random number generation.

Every stochastic operation in the package takes an explicit integer seed and
builds a Philox-backed generator from it.  Philox is counter-based, so child
streams derived from (seed, key...) tuples are statistically independent and
results do not depend on evaluation order or degree of parallelism.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the stream identified by (seed, keys...)."""
    ss = np.random.SeedSequence((int(seed),) + tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def ensure_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(0 if seed_or_rng is None else seed_or_rng)
