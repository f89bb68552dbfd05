"""Deterministic random-stream derivation.

Every randomized step in the package (data synthesis, holdout split, fold
assignment) draws from its own generator derived from one master seed, a
purpose tag and an iteration index. Streams for different (purpose, index)
pairs are statistically independent, and the derivation does not depend on
process state (no ``PYTHONHASHSEED`` sensitivity), so a run is reproducible
from the master seed alone.
"""

import hashlib

import numpy as np

from .errors import DataError

_MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    """Validate a master seed (unsigned 64-bit integer)."""
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise DataError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= seed <= _MAX_SEED:
        raise DataError(f"seed must be in [0, 2**64), got {seed}")
    return int(seed)


def derive_rng(master_seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Return the generator for (master_seed, purpose, index).

    The purpose tag is hashed to a 32-bit key so distinct tags cannot
    collide with distinct indices.
    """
    check_seed(master_seed)
    tag = int.from_bytes(hashlib.sha256(purpose.encode("utf-8")).digest()[:4], "big")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(tag, int(index)))
    return np.random.default_rng(seq)
