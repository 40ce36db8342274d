"""Estimators of ``x* = 1{row belongs to the planted block}`` and block ranking.

Three estimators are combined:

* ``row_sum``: the tested row's total against ``sqrt(2 d ln(n/delta))``;
* ``two_stage``: columns are first selected from the *other* rows by their
  column sums, then the tested row is summed over the selected columns;
* ``scan_two_stage``: the selected columns are the size-``m`` set carrying
  the heaviest ``m x m`` submatrix among the other rows.

An empty selection never fires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .detect import SCAN_BUDGET, DetectDecision, ScanBudgetError, _restricted_row_sums, _top_sums
from .model import InvalidParameterError, as_observations, order_to_permutation


@dataclass(frozen=True)
class SupportDecision:
    row: int
    parts: Tuple[DetectDecision, ...]
    selected: Tuple[int, ...]
    selected_scan: Optional[Tuple[int, ...]]
    scan_size: int
    decision: int

    def as_dict(self) -> dict:
        return {"row": self.row, "decision": self.decision, "scan_size": self.scan_size,
                "selected": list(self.selected),
                "selected_scan": None if self.selected_scan is None else list(self.selected_scan),
                "parts": [p.as_dict() for p in self.parts]}


def _check(Y, delta: float, row: int) -> np.ndarray:
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    Y = as_observations(Y)
    if not 0 <= row < Y.shape[0]:
        raise InvalidParameterError(f"row {row} out of range for n={Y.shape[0]}")
    return Y


def _decide(test: str, statistic: float, threshold: float) -> DetectDecision:
    return DetectDecision(test, float(statistic), float(threshold), int(statistic >= threshold))


def _restricted_decision(test: str, y_row: np.ndarray, cols, n: int, delta: float) -> DetectDecision:
    cols = list(cols)
    if not cols:
        # Empty selection: infinite threshold keeps decision == (stat >= thr).
        return DetectDecision(test, 0.0, math.inf, 0)
    stat = int(y_row[cols].sum(dtype=np.int64))
    return _decide(test, stat, math.sqrt(2 * len(cols) * math.log(n / delta)))


def est_row_sum(Y, delta: float, row: int = 0) -> DetectDecision:
    Y = _check(Y, delta, row)
    n, d = Y.shape
    return _decide("row_sum", int(Y[row].sum(dtype=np.int64)), math.sqrt(2 * d * math.log(n / delta)))


def select_columns(Y, delta: float, row: int) -> np.ndarray:
    """Columns whose sum over all rows except ``row`` reaches ``sqrt(2n ln(d/delta))``."""
    n, d = Y.shape
    col_sums = Y.sum(axis=0, dtype=np.int64) - Y[row]
    return np.flatnonzero(col_sums >= math.sqrt(2 * n * math.log(d / delta)))


def est_two_stage(Y, delta: float, row: int = 0):
    """Return ``(decision, selected_columns)``."""
    Y = _check(Y, delta, row)
    n = Y.shape[0]
    if n < 2:
        raise InvalidParameterError("two-stage estimator needs n >= 2")
    cols = select_columns(Y, delta, row)
    return _restricted_decision("two_stage", Y[row], cols, n, delta), tuple(int(k) for k in cols)


def scan_select(Y, m: int, row: int, budget: int = SCAN_BUDGET) -> Tuple[int, ...]:
    """Size-``m`` column set maximizing the best ``m``-row sum over rows other than ``row``.

    Column sets are compared in lexicographic order and the smallest maximizer wins.
    """
    Y = np.asarray(Y, dtype=np.int32)
    n, d = Y.shape
    cost = math.comb(d, m)
    if cost > budget:
        raise ScanBudgetError(f"scan would enumerate {cost} column subsets (budget {budget})")
    others = np.delete(Y, row, axis=0)
    row_sums = others.sum(axis=1)
    best_val, best_T = None, None
    for subsets, R in _restricted_row_sums(others, row_sums, m):
        vals = _top_sums(R, m).sum(axis=0)
        top = vals.max()
        if best_val is not None and top < best_val:
            continue
        cands = subsets[vals == top]
        first = cands[np.lexsort(cands.T[::-1])[0]]
        cand_T = tuple(int(k) for k in first)
        if best_val is None or top > best_val or cand_T < best_T:
            best_val, best_T = top, cand_T
    return best_T


def est_scan_two_stage(Y, m: int, delta: float, row: int = 0, budget: int = SCAN_BUDGET):
    """Return ``(decision, selected_columns)`` for the scan-based selection."""
    Y = _check(Y, delta, row)
    n, d = Y.shape
    if not 1 <= m <= min(n - 1, d):
        raise InvalidParameterError(f"scan size m={m} must satisfy 1 <= m <= min(n-1, d)")
    T = scan_select(Y, m, row, budget)
    return _restricted_decision(f"scan_two_stage_{m}", Y[row], T, n, delta), T


def est_combined(Y, m: int, kn: int, kd: int, delta: float, row: int = 0,
                 budget: int = SCAN_BUDGET) -> SupportDecision:
    """OR of the three estimators, with scan size ``m ^ kn ^ kd`` (clamped to ``(n-1) ^ d``)."""
    Y = _check(Y, delta, row)
    n, d = Y.shape
    if min(m, kn, kd) < 1:
        raise InvalidParameterError("m, kn and kd must be positive")
    parts = [est_row_sum(Y, delta, row)]
    selected: Tuple[int, ...] = ()
    selected_scan = None
    s = min(m, kn, kd, n - 1, d)
    if n >= 2:
        two, selected = est_two_stage(Y, delta, row)
        scan, selected_scan = est_scan_two_stage(Y, s, delta, row, budget)
        parts += [two, scan]
    decision = int(any(p.decision for p in parts))
    return SupportDecision(row, tuple(parts), selected, selected_scan, max(s, 0), decision)


def block_scores(Y, delta: float) -> np.ndarray:
    """Per-row ``max(row_sum / t1, restricted_sum / t2)`` with leave-one-out selection."""
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    Y = as_observations(Y)
    n, d = Y.shape
    Yi = Y.astype(np.int64)
    first = Yi.sum(axis=1) / math.sqrt(2 * d * math.log(n / delta))
    # Leave-one-out column sums for every row at once.
    loo = Yi.sum(axis=0)[None, :] - Yi
    sel = loo >= math.sqrt(2 * n * math.log(d / delta))
    size = sel.sum(axis=1)
    restricted = (Yi * sel).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        second = np.where(size > 0, restricted / np.sqrt(2 * np.maximum(size, 1) * math.log(n / delta)), -np.inf)
    return np.maximum(first, second)


def rank_block(Y, delta: float = 0.05) -> np.ndarray:
    """Rows sorted by :func:`block_scores`, descending, ties by index; returns ``pi``."""
    Y = as_observations(Y)
    if Y.shape[0] < 2:
        return np.zeros(Y.shape[0], dtype=np.intp)
    order = np.argsort(-block_scores(Y, delta), kind="stable")
    return order_to_permutation(order)
