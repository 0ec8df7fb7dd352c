"""Named random substreams.

Every random draw in a run comes from ``substream(seed, *keys)`` so results
do not depend on evaluation order, and a resumed run draws exactly what an
uninterrupted one would.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stable_key(obj) -> int:
    """Process-independent 32-bit integer for an int, str or bytes key."""
    if isinstance(obj, (int, np.integer)) and obj >= 0:
        return int(obj) & 0xFFFFFFFF
    if isinstance(obj, str):
        obj = obj.encode()
    elif not isinstance(obj, bytes):
        obj = repr(obj).encode()
    return int.from_bytes(hashlib.blake2b(obj, digest_size=4).digest(), "little")


def substream(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(stable_key(k) for k in keys)))


def subseed(seed: int, *keys) -> int:
    """Integer seed derived from ``(seed, keys)`` for APIs that take plain ints."""
    return int(np.random.SeedSequence(int(seed), spawn_key=tuple(stable_key(k) for k in keys)).generate_state(1)[0])
