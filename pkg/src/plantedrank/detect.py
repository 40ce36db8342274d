"""Tests for ``x0 = 1{M != 0}``: global sum, line scans, submatrix scan.

Every statistic is monotone non-decreasing in the entries of ``Y``, and each
test fires when its statistic reaches a threshold calibrated so that the
type-I error under ``M = 0`` is at most ``delta`` (natural logarithms).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .model import InvalidParameterError, as_observations, make_block_matrix, random_block, sample_observations
from .montecarlo import RiskEstimate, run_replicates

SCAN_BUDGET = 10 ** 7
_CHUNK = 1 << 14


class ScanBudgetError(RuntimeError):
    """The exhaustive scan would enumerate more subsets than allowed."""


@dataclass(frozen=True)
class DetectDecision:
    test: str
    statistic: float
    threshold: float
    decision: int
    parts: Tuple["DetectDecision", ...] = field(default=())

    def as_dict(self) -> dict:
        # Non-finite thresholds (empty selections) become null in JSON.
        thr = self.threshold if math.isfinite(self.threshold) else None
        out = {"test": self.test, "statistic": self.statistic,
               "threshold": thr, "decision": self.decision}
        if self.parts:
            out["parts"] = [p.as_dict() for p in self.parts]
        return out


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")


def _decide(test: str, statistic: float, threshold: float) -> DetectDecision:
    return DetectDecision(test, float(statistic), float(threshold), int(statistic >= threshold))


def threshold_global_sum(n: int, d: int, delta: float) -> float:
    return math.sqrt(2 * n * d * math.log(1 / delta))


def threshold_line_scan(length: int, count: int, delta: float) -> float:
    """Threshold for the max over ``count`` sums of ``length`` entries."""
    return math.sqrt(2 * length * math.log(count / delta))


def threshold_submatrix_scan(n: int, d: int, m: int, delta: float) -> float:
    return m * math.sqrt(2 * m * math.log(n * d / delta))


def stat_global_sum(Y, delta: float) -> DetectDecision:
    _check_delta(delta)
    Y = as_observations(Y)
    n, d = Y.shape
    return _decide("global_sum", int(Y.sum(dtype=np.int64)), threshold_global_sum(n, d, delta))


def stat_line_scan(Y, delta: float, axis: str = "rows") -> DetectDecision:
    _check_delta(delta)
    Y = as_observations(Y)
    n, d = Y.shape
    if axis == "rows":
        stat = Y.sum(axis=1, dtype=np.int64).max()
        return _decide("row_scan", stat, threshold_line_scan(d, n, delta))
    if axis == "cols":
        stat = Y.sum(axis=0, dtype=np.int64).max()
        return _decide("col_scan", stat, threshold_line_scan(n, d, delta))
    raise InvalidParameterError(f"axis must be 'rows' or 'cols', got {axis!r}")


# -- exhaustive scan machinery ------------------------------------------------

def _subset_chunks(d: int, t: int, chunk: int = _CHUNK) -> Iterator[np.ndarray]:
    """Size-``t`` subsets of ``range(d)`` in lexicographic order, in chunks."""
    it = itertools.combinations(range(d), t)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.intp).reshape(len(block), t)


def _restricted_row_sums(Y: np.ndarray, row_sums: np.ndarray, t: int, chunk: int = _CHUNK):
    """Yield ``(subsets, R)`` with ``R[i, c] = sum_{k in subsets[c]} Y[i, k]``.

    Large subsets are handled through their complements; ``subsets`` always
    holds the actual column sets.
    """
    d = Y.shape[1]
    if t > d - t:
        full = np.arange(d)
        for comp in _subset_chunks(d, d - t, chunk):
            R = row_sums[:, None] - Y[:, comp].sum(axis=2, dtype=np.int32) if comp.shape[1] else \
                np.repeat(row_sums[:, None], comp.shape[0], axis=1)
            mask = np.ones((comp.shape[0], d), dtype=bool)
            mask[np.arange(comp.shape[0])[:, None], comp] = False
            subsets = np.broadcast_to(full, mask.shape)[mask].reshape(comp.shape[0], t)
            yield subsets, R
    else:
        for sub in _subset_chunks(d, t, chunk):
            yield sub, Y[:, sub].sum(axis=2, dtype=np.int32)


def _top_sums(R: np.ndarray, k: int) -> np.ndarray:
    """Per column of ``R``: descending top-``k`` values (shape ``k x C``)."""
    n = R.shape[0]
    k = min(k, n)
    if k < n:
        part = -np.partition(-R, k - 1, axis=0)[:k]
    else:
        part = R
    return -np.sort(-part, axis=0)


def scan_cost(d: int, m: int) -> int:
    return sum(math.comb(d, t) for t in range(1, m + 1))


def max_submatrix_sum(Y, m: int, budget: int = SCAN_BUDGET) -> int:
    """``max sum_{S x T} Y`` over non-empty ``S, T`` with ``|S|, |T| <= m``."""
    Y = np.asarray(Y, dtype=np.int32)
    n, d = Y.shape
    if n < d:
        # Same value, cheaper enumeration along the shorter side.
        Y = Y.T
        n, d = d, n
    cost = scan_cost(d, m)
    if cost > budget:
        raise ScanBudgetError(f"scan would enumerate {cost} column subsets (budget {budget})")
    row_sums = Y.sum(axis=1)
    best = None
    for t in range(1, m + 1):
        for _, R in _restricted_row_sums(Y, row_sums, t):
            top = _top_sums(R, m)
            # Optimal S of size <= m: the largest entry plus any positive others.
            val = top[0] + np.clip(top[1:], 0, None).sum(axis=0)
            cur = int(val.max())
            best = cur if best is None else max(best, cur)
    return best


def stat_submatrix_scan(Y, m: int, delta: float, budget: int = SCAN_BUDGET) -> DetectDecision:
    _check_delta(delta)
    Y = as_observations(Y)
    n, d = Y.shape
    if not 1 <= m <= min(n, d):
        raise InvalidParameterError(f"scan size m={m} must satisfy 1 <= m <= min(n, d)")
    stat = max_submatrix_sum(Y, m, budget)
    return _decide(f"submatrix_scan_{m}", stat, threshold_submatrix_scan(n, d, m, delta))


def _or(test: str, parts: Sequence[DetectDecision]) -> DetectDecision:
    # statistic = max margin, threshold 0, so decision == (statistic >= threshold) still holds.
    margin = max(p.statistic - p.threshold for p in parts)
    return DetectDecision(test, float(margin), 0.0, int(any(p.decision for p in parts)), tuple(parts))


def detect_aggregate(Y, m: int, kn: int, kd: int, delta: float,
                     budget: int = SCAN_BUDGET) -> DetectDecision:
    """OR of global sum, row scan, column scan and a scan of size ``m ^ kn ^ kd``."""
    Y = as_observations(Y)
    if kn < 1 or kd < 1 or m < 1:
        raise InvalidParameterError("m, kn and kd must be positive")
    s = min(m, kn, kd, *Y.shape)
    parts = [stat_global_sum(Y, delta), stat_line_scan(Y, delta, "rows"),
             stat_line_scan(Y, delta, "cols"), stat_submatrix_scan(Y, s, delta, budget)]
    return _or("aggregate", parts)


def dyadic(n: int) -> List[int]:
    return [1 << j for j in range(int(math.floor(math.log2(n))) + 1)]


def detect_dyadic(Y, m: int, delta: float, budget: int = SCAN_BUDGET) -> DetectDecision:
    """OR of :func:`detect_aggregate` over dyadic ``(kn, kd)``, each at level ``delta/4``.

    The global and line statistics do not depend on ``(kn, kd)``; one scan is
    run per distinct size ``m ^ kn ^ kd``.
    """
    _check_delta(delta)
    Y = as_observations(Y)
    n, d = Y.shape
    level = delta / 4
    sizes = sorted({min(m, kn, kd, n, d) for kn in dyadic(n) for kd in dyadic(d)})
    parts = [stat_global_sum(Y, level), stat_line_scan(Y, level, "rows"), stat_line_scan(Y, level, "cols")]
    parts += [stat_submatrix_scan(Y, s, level, budget) for s in sizes]
    return _or("dyadic", parts)


# -- named tests and generators used by the Monte Carlo drivers ---------------

def make_test(name: str, delta: float, m: int = 1, kn: int = 1, kd: int = 1) -> Callable:
    """Return ``Y -> DetectDecision`` for a named test."""
    if name in ("gs", "global_sum"):
        return lambda Y: stat_global_sum(Y, delta)
    if name in ("rs", "row_scan"):
        return lambda Y: stat_line_scan(Y, delta, "rows")
    if name in ("cs", "col_scan"):
        return lambda Y: stat_line_scan(Y, delta, "cols")
    if name in ("ss", "submatrix_scan"):
        return lambda Y: stat_submatrix_scan(Y, m, delta)
    if name == "aggregate":
        return lambda Y: detect_aggregate(Y, m, kn, kd, delta)
    if name == "dyadic":
        return lambda Y: detect_dyadic(Y, m, delta)
    if name in ("zero", "one"):
        val = int(name == "one")
        return lambda Y: DetectDecision(name, float(val), 1.0, val)
    raise InvalidParameterError(f"unknown detection test {name!r}")


def null_generator(n: int, d: int) -> Callable:
    return lambda rng: np.zeros((n, d))


def block_generator(n: int, d: int, lam: float, kn: int, kd: int) -> Callable:
    return lambda rng: make_block_matrix(random_block(n, d, lam, kn, kd, rng), n, d)


def mc_detection_risk(test: Callable, generator: Callable, replicates: int, seed,
                      tag: str = "detect", workers: Optional[int] = 1,
                      return_records: bool = False):
    """Monte Carlo estimate of ``E[(f(Y) - x0)^2]`` over fresh ``(M, Y)`` draws."""

    def one(rng, i):
        M = generator(rng)
        Y = sample_observations(M, rng)
        res = test(Y)
        x0 = int(np.any(M != 0))
        return res, x0

    out = run_replicates(one, replicates, seed, tag, workers)
    losses = [(res.decision - x0) ** 2 for res, x0 in out]
    risk = RiskEstimate.from_losses(losses)
    return (risk, out) if return_records else risk


@dataclass(frozen=True)
class SweepResult:
    table: Tuple[Tuple[float, float], ...]
    rho_star: Optional[float]

    @property
    def reached(self) -> bool:
        return self.rho_star is not None


def separation_sweep(n: int, d: int, m: int, epsilon: float, rho_grid: Sequence[float],
                     replicates: int, seed, workers: Optional[int] = 1) -> SweepResult:
    """Worst Monte Carlo risk of the dyadic test over ``{0} u {||M||_F >= rho}``.

    Alternatives are blocks on dyadic ``(kn, kd)`` with ``lam^2 kn kd = rho^2``;
    pairs that would need ``lam > 1`` cannot reach norm ``rho`` and are skipped.
    """
    if len(rho_grid) == 0:
        raise InvalidParameterError("rho grid must be non-empty")
    test = make_test("dyadic", epsilon, m)
    null_risk = mc_detection_risk(test, null_generator(n, d), replicates, seed, "sweep:null", workers).mean
    table = []
    for i, rho in enumerate(rho_grid):
        worst = null_risk
        if rho > 0:
            for kn in dyadic(n):
                for kd in dyadic(d):
                    lam = rho / math.sqrt(kn * kd)
                    if lam > 1.0:
                        continue
                    gen = block_generator(n, d, lam, kn, kd)
                    r = mc_detection_risk(test, gen, replicates, seed, f"sweep:{i}:{kn}:{kd}", workers)
                    worst = max(worst, r.mean)
        table.append((float(rho), float(worst)))
    # rho = 0 only checks the null, so it never certifies separation.
    rho_star = None
    for rho, risk in sorted(table, reverse=True):
        if risk > epsilon or rho <= 0:
            break
        rho_star = rho
    return SweepResult(tuple(table), rho_star)
