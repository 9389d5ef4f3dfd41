"""Seeded random streams.

All randomness uses numpy's ``PCG64`` bit generator. A stream is fully
determined by a non-negative integer seed, and ``derive_seed`` maps a root
seed plus a stage name onto an independent sub-seed.
"""
import hashlib

import numpy as np

SEED_MODULUS = 2 ** 64


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < SEED_MODULUS:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def make_rng(seed):
    """Return a ``numpy.random.Generator`` over PCG64 seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


def replica_seed(seed, index):
    return (check_seed(seed) + int(index)) % SEED_MODULUS


def derive_seed(seed, stage):
    """Sub-seed for a named pipeline stage (BLAKE2b of the stage name)."""
    digest = hashlib.blake2b(stage.encode("utf-8"), digest_size=8).digest()
    return (check_seed(seed) + int.from_bytes(digest, "big")) % SEED_MODULUS
