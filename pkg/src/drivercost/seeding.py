"""Deterministic child-seed derivation for parallel-safe stochastic stages.

Every stochastic step draws from a generator derived from the root seed plus
stable tags (stage name, scenario id, trial/sample index), so results are
independent of worker scheduling and identical across runs.
"""

from __future__ import annotations

import zlib

import numpy as np


def _to_entropy(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & 0xFFFFFFFF


def seed_sequence(root_seed: int, *parts) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(root_seed)] + [_to_entropy(p) for p in parts])


def rng_for(root_seed: int, *parts) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(root_seed, *parts))
