"""Deterministic seed derivation for replicated experiments.

A child seed is derived from ``(master, replicate, tag)`` with a splitmix64
avalanche, so a given triple always yields the same stream regardless of
execution order or worker count::

    h = fnv1a64(tag.encode("utf-8"))
    s = splitmix64(master)
    s = splitmix64(s ^ replicate)
    s = splitmix64(s ^ h)

All arithmetic is modulo 2**64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 finalizer step on a 64-bit unsigned integer."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & _MASK
    return h


def derive_seed(master: int, replicate: int = 0, tag: str = "") -> int:
    s = splitmix64(master & _MASK)
    s = splitmix64(s ^ (replicate & _MASK))
    return splitmix64(s ^ fnv1a64(tag.encode("utf-8")))


@dataclass(frozen=True)
class RngSeed:
    """A master seed plus the rule for deriving per-replicate child streams."""

    master: int

    def __post_init__(self):
        if not 0 <= self.master <= _MASK:
            raise ValueError(f"master seed must be a 64-bit unsigned integer, got {self.master}")

    def child(self, replicate: int, tag: str = "") -> int:
        return derive_seed(self.master, replicate, tag)

    def generator(self, replicate: int = 0, tag: str = "") -> np.random.Generator:
        return np.random.default_rng(self.child(replicate, tag))


def as_generator(seed) -> np.random.Generator:
    """Coerce an int, :class:`RngSeed`, or Generator into a numpy Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        return seed.generator()
    return np.random.default_rng(seed)
