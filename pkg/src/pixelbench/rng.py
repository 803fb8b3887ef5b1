"""Deterministic seed derivation.

All randomness in pixelbench flows from explicit 64-bit base seeds. When a
component needs several independent streams (one per attack run, one per
tree node), it derives child seeds with :func:`mix64`, a SplitMix64 step:
the base seed is advanced by ``(index + 1)`` times the golden-ratio gamma
and passed through the SplitMix64 finalizer. The function is frozen: child
streams must stay stable across releases so serialized experiments replay
bit-identically.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


def mix64(seed: int, index: int) -> int:
    """Derive child seed ``index`` from ``seed`` (SplitMix64, frozen)."""
    z = (seed + (index + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def generator(seed: int) -> np.random.Generator:
    """PCG64 generator seeded with a 64-bit value."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))


def child_generator(seed: int, index: int) -> np.random.Generator:
    """Generator for the ``index``-th derived stream of ``seed``."""
    return generator(mix64(seed, index))
