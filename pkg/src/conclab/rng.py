"""Deterministic seed derivation.

Every Monte Carlo trial gets its own 64-bit seed derived from the master
seed, so estimates are identical under any degree of parallelism or trial
ordering.  The mixing function is splitmix64; the derivation rule is

    seed(trial i) = derive_seed(master, stream_hash, i)

where ``derive_seed`` folds each word into the state with one splitmix64
round.  Matching streams across implementations requires reproducing this
rule; exact oracles do not depend on it.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1

DEFAULT_SEED = 1729


def splitmix64(x: int) -> int:
    """One splitmix64 round of the 64-bit state ``x``."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *words: int) -> int:
    """Fold ``words`` (trial indices, stream hashes) into ``master``."""
    state = splitmix64(master & _MASK64)
    for w in words:
        state = splitmix64(state ^ (w & _MASK64))
    return state


def stream_hash(name: str) -> int:
    """Stable 64-bit hash of a stream label (experiment id, parameter blob)."""
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")
