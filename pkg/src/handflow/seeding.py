"""Hierarchical seed derivation.

All pipeline randomness flows from one global seed, split per stage /
episode / frame via SHA-256 so parallel and serial runs draw identical
streams on any platform.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(root: int, *parts: str | int) -> int:
    """Deterministic 64-bit child seed for a labeled sub-stream."""
    h = hashlib.sha256()
    h.update(str(int(root)).encode())
    for p in parts:
        h.update(b"/")
        h.update(str(p).encode())
    return int.from_bytes(h.digest()[:8], "little") & MASK64


def rng_for(root: int, *parts: str | int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, *parts))
