"""Replicated Monte Carlo execution with deterministic reduction."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .rng import RngSeed

Z95 = 1.959963984540054


def worker_count(requested: Optional[int] = None) -> int:
    """Number of workers, capped by ``PLANTEDRANK_THREADS`` and the CPU count."""
    cap = os.environ.get("PLANTEDRANK_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        limit = min(limit, max(1, int(cap)))
    if requested is None:
        return limit
    return max(1, min(int(requested), limit))


def run_replicates(fn: Callable[[np.random.Generator, int], object], replicates: int,
                   seed, tag: str, workers: Optional[int] = 1) -> List[object]:
    """Evaluate ``fn(rng, i)`` for ``i in range(replicates)``.

    Replicate ``i`` always receives the stream derived from
    ``(master, i, tag)``, and results come back ordered by ``i``, so serial
    and threaded runs agree exactly.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    seed = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))

    def one(i):
        return fn(seed.generator(i, tag), i)

    nworkers = worker_count(workers)
    if nworkers == 1 or replicates == 1:
        return [one(i) for i in range(replicates)]
    with ThreadPoolExecutor(max_workers=nworkers) as pool:
        return list(pool.map(one, range(replicates)))


@dataclass(frozen=True)
class RiskEstimate:
    """Mean of a {0,1}-valued loss with a 95% binomial interval half-width."""

    mean: float
    replicates: int
    half_width: float

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0 or self.half_width < 0:
            raise ValueError("invalid risk estimate")

    @property
    def stderr(self) -> float:
        return binomial_se(self.mean, self.replicates)

    @classmethod
    def from_losses(cls, losses) -> "RiskEstimate":
        losses = np.asarray(losses, dtype=float)
        R = losses.size
        p = float(losses.mean())
        return cls(p, R, wilson_half_width(p, R))


def binomial_se(p: float, replicates: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / replicates)


def wilson_half_width(p: float, replicates: int, z: float = Z95) -> float:
    """Half-width of the Wilson score interval; a single replicate gets the
    uninformative interval [0, 1]."""
    if replicates <= 1:
        return 0.5
    denom = 1.0 + z * z / replicates
    return z * math.sqrt(p * (1 - p) / replicates + z * z / (4 * replicates ** 2)) / denom


def mean_ci(values) -> tuple:
    """``(mean, half_width)`` of a normal-approximation 95% interval; the
    half-width is ``None`` for fewer than two values."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan"), None
    if values.size < 2:
        return float(values.mean()), None
    return float(values.mean()), float(Z95 * values.std(ddof=1) / math.sqrt(values.size))
