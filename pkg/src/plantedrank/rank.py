"""Ranking estimators and isotonic reconstruction.

All rankers return ``pi`` with ``pi[i]`` the rank of row ``i`` (0 is best).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import isotonic_regression
from scipy.stats import rankdata

from .model import (InvalidParameterError, LossReport, apply_row_permutation, check_permutation,
                    order_to_permutation, ranking_loss, reconstruction_loss, sample_observations)
from .montecarlo import mean_ci, run_replicates
from .support import rank_block

_FALLBACK_START_SEED = 0x5EED


@dataclass(frozen=True)
class RankMethod:
    tag: str = "row-sum"
    tol: float = 1e-10
    max_iter: int = 10_000
    delta: float = 0.05

    _ALIASES = {"row-sum": "row-sum", "rowsum": "row-sum", "row_sum": "row-sum",
                "spectral": "spectral", "block": "block"}

    def __post_init__(self):
        if self.tag not in self._ALIASES:
            raise InvalidParameterError(f"unknown ranking method {self.tag!r}")
        object.__setattr__(self, "tag", self._ALIASES[self.tag])
        if not self.tol > 0:
            raise InvalidParameterError("tolerance must be positive")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be >= 1")

    def rank(self, Y) -> np.ndarray:
        if self.tag == "row-sum":
            return rank_row_sums(Y)
        if self.tag == "spectral":
            return rank_spectral(Y, tol=self.tol, max_iter=self.max_iter)
        return rank_block(Y, self.delta)


def _descending(scores) -> np.ndarray:
    return order_to_permutation(np.argsort(-np.asarray(scores), kind="stable"))


def rank_row_sums(Y) -> np.ndarray:
    return _descending(np.asarray(Y, dtype=float).sum(axis=1))


def top_left_singular_vector(A, tol: float = 1e-10, max_iter: int = 10_000):
    """Power iteration on ``A A^T``.

    Starts from the normalized row sums of ``A`` (a fixed pseudo-random vector
    when those vanish). Returns ``(v, converged, iterations)``; ``v`` is
    ``None`` when ``A`` is zero.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if not np.any(A):
        return None, True, 0
    v = A.sum(axis=1)
    if np.linalg.norm(v) < 1e-12 * max(1.0, np.abs(A).max()):
        v = np.random.default_rng(_FALLBACK_START_SEED).standard_normal(n)
    v = v / np.linalg.norm(v)
    for it in range(1, max_iter + 1):
        w = A @ (A.T @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return v, True, it
        w /= norm
        if np.linalg.norm(w - v) < tol:
            return w, True, it
        v = w
    return v, False, max_iter


def rank_spectral(Y, tol: float = 1e-10, max_iter: int = 10_000, center: bool = True,
                  return_info: bool = False):
    """Order rows by the top left singular vector of the column-centered matrix.

    The sign is chosen so that the induced order agrees with the row-sum
    order (non-negative Spearman correlation); on an exact zero the first
    coordinate is made positive. A zero matrix yields the identity.
    """
    A = np.asarray(Y, dtype=float)
    n = A.shape[0]
    if center:
        A = A - A.mean(axis=0, keepdims=True)
    v, converged, iters = top_left_singular_vector(A, tol, max_iter)
    if v is None:
        pi = np.arange(n, dtype=np.intp)
    else:
        if not converged:
            warnings.warn(f"power iteration did not converge in {max_iter} iterations",
                          RuntimeWarning, stacklevel=2)
        sums = np.asarray(Y, dtype=float).sum(axis=1)
        agree = _spearman(v, sums)
        if agree < 0 or (agree == 0 and v[0] < 0):
            v = -v
        pi = _descending(v)
    if return_info:
        return pi, {"converged": converged, "iterations": iters}
    return pi


def _spearman(a, b) -> float:
    ra, rb = rankdata(a), rankdata(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = np.sqrt((ra ** 2).sum() * (rb ** 2).sum())
    return 0.0 if denom == 0 else float((ra * rb).sum() / denom)


def project_isotonic(A) -> np.ndarray:
    """Euclidean projection onto ``[0, 1]``-valued matrices with non-increasing columns."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        return project_isotonic(A[:, None])[:, 0]
    out = np.empty_like(A)
    for k in range(A.shape[1]):
        out[:, k] = isotonic_regression(A[:, k], increasing=False).x
    return np.clip(out, 0.0, 1.0)


def reconstruct(Y, pi_hat) -> np.ndarray:
    """Project ``Y`` sorted by ``pi_hat`` and map the estimate back to original row order."""
    Y = np.asarray(Y, dtype=float)
    pi_hat = check_permutation(pi_hat, Y.shape[0])
    return apply_row_permutation(project_isotonic(apply_row_permutation(Y, pi_hat)), pi_hat, inverse=False)


@dataclass(frozen=True)
class PipelineResult:
    losses: tuple
    ranking_mean: float
    ranking_half_width: Optional[float]
    reconstruction_mean: float
    reconstruction_half_width: Optional[float]


def evaluate_pipeline(generator: Callable, method: RankMethod, replicates: int, seed,
                      tag: str = "pipeline", workers: Optional[int] = 1) -> PipelineResult:
    """Draw ``(M, pi_star) = generator(rng)``, sample ``Y``, rank, reconstruct, score."""

    def one(rng, i):
        M, pi_star = generator(rng)
        Y = sample_observations(M, rng)
        pi_hat = method.rank(Y)
        M_hat = reconstruct(Y, pi_hat)
        return LossReport(ranking_loss(M, pi_hat, pi_star), reconstruction_loss(M_hat, M))

    losses = tuple(run_replicates(one, replicates, seed, tag, workers))
    rm, rh = mean_ci([r.ranking_loss for r in losses])
    cm, ch = mean_ci([r.reconstruction_loss for r in losses])
    return PipelineResult(losses, rm, rh, cm, ch)
