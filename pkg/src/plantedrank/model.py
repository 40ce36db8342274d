"""Signal and observation matrices, instance generators, permutations, losses.

Conventions
-----------
Rows are experts, columns are questions, indices are 0-based.

A permutation ``pi`` is stored as an integer array with ``pi[i]`` the
position (rank) assigned to row ``i``.  The matrix ``M_{pi^{-1}}`` whose
row ``i`` is ``M[pi^{-1}(i)]`` is therefore ``M[np.argsort(pi)]``: the rows
of ``M`` listed in rank order.  A matrix is isotonic when every column is
non-increasing down the rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .rng import as_generator


class InvalidSpecError(ValueError):
    """A block specification does not fit the matrix dimensions."""


class InvalidParameterError(ValueError):
    """A numeric parameter is outside its admissible range."""


class InvalidOracleError(ValueError):
    """A permutation supplied as oracle does not sort the matrix."""


class InvalidInputError(ValueError):
    """A matrix violates a structural precondition."""


def as_signal(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InvalidInputError(f"signal matrix must be a non-empty 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M)) or M.min() < 0.0 or M.max() > 1.0:
        raise InvalidInputError("signal matrix entries must lie in [0, 1]")
    return M


def as_observations(Y) -> np.ndarray:
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[0] < 1 or Y.shape[1] < 1:
        raise InvalidInputError(f"observation matrix must be a non-empty 2-d array, got shape {Y.shape}")
    if not np.all((Y == 1) | (Y == -1)):
        raise InvalidInputError("observation entries must be exactly -1 or +1")
    return Y.astype(np.int8, copy=False)


def check_permutation(pi, n: Optional[int] = None) -> np.ndarray:
    pi = np.asarray(pi)
    if pi.ndim != 1 or not np.issubdtype(pi.dtype, np.integer):
        raise InvalidParameterError("permutation must be a 1-d integer array")
    if n is not None and pi.shape[0] != n:
        raise InvalidParameterError(f"permutation has length {pi.shape[0]}, expected {n}")
    if not np.array_equal(np.sort(pi), np.arange(pi.shape[0])):
        raise InvalidParameterError("array is not a permutation of 0..n-1")
    return pi.astype(np.intp, copy=False)


def invert_permutation(pi) -> np.ndarray:
    pi = np.asarray(pi)
    inv = np.empty_like(pi)
    inv[pi] = np.arange(pi.shape[0], dtype=pi.dtype)
    return inv


def order_to_permutation(order) -> np.ndarray:
    """Turn a list of rows in rank order into ``pi`` (row -> rank)."""
    return invert_permutation(np.asarray(order, dtype=np.intp))


def compose(sigma, pi) -> np.ndarray:
    """Return ``sigma o pi``, i.e. ``i -> sigma[pi[i]]``."""
    return np.asarray(sigma)[np.asarray(pi)]


@dataclass(frozen=True)
class BlockSpec:
    """A planted block ``lam * 1{rows x cols}``."""

    lam: float
    rows: tuple
    cols: tuple

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise InvalidSpecError(f"lambda must lie in (0, 1], got {self.lam}")
        object.__setattr__(self, "rows", tuple(sorted(int(i) for i in self.rows)))
        object.__setattr__(self, "cols", tuple(sorted(int(k) for k in self.cols)))
        if len(set(self.rows)) != len(self.rows) or len(set(self.cols)) != len(self.cols):
            raise InvalidSpecError("block rows and columns must not repeat")

    @property
    def kn(self) -> int:
        return len(self.rows)

    @property
    def kd(self) -> int:
        return len(self.cols)


@dataclass(frozen=True)
class LossReport:
    ranking_loss: float
    reconstruction_loss: float

    def __post_init__(self):
        if self.ranking_loss < 0 or self.reconstruction_loss < 0:
            raise ValueError("losses are non-negative")


def sample_observations(M, seed) -> np.ndarray:
    """Draw ``Y`` with ``P[Y_ik = +1] = (1 + M_ik) / 2`` independently."""
    M = as_signal(M)
    rng = as_generator(seed)
    u = rng.random(M.shape)
    return np.where(u < (1.0 + M) / 2.0, 1, -1).astype(np.int8)


def make_block_matrix(spec: BlockSpec, n: int, d: int) -> np.ndarray:
    if any(i < 0 or i >= n for i in spec.rows) or any(k < 0 or k >= d for k in spec.cols):
        raise InvalidSpecError(f"block indices out of range for a {n}x{d} matrix")
    M = np.zeros((n, d))
    M[np.ix_(list(spec.rows), list(spec.cols))] = spec.lam
    return M


def random_block(n: int, d: int, lam: float, kn: int, kd: int, seed) -> BlockSpec:
    """Uniformly random member of H(lam, kn, kd)."""
    if not (1 <= kn <= n and 1 <= kd <= d):
        raise InvalidParameterError(f"need 1 <= kn <= n and 1 <= kd <= d, got kn={kn}, kd={kd}")
    rng = as_generator(seed)
    rows = rng.choice(n, size=kn, replace=False)
    cols = rng.choice(d, size=kd, replace=False)
    return BlockSpec(lam, rows, cols)


def is_isotonic(M) -> bool:
    M = np.asarray(M, dtype=float)
    return bool(np.all(M[:-1] >= M[1:]))


def is_permuted_isotonic(M):
    """Decide membership in the permuted isotonic class.

    Rows are sorted by decreasing row sum (stable), then each row must
    dominate the next one coordinatewise.

    Returns:
        ``(True, pi)`` with ``M_{pi^{-1}}`` isotonic, or ``(False, None)``.
    """
    M = np.asarray(M, dtype=float)
    order = np.argsort(-M.sum(axis=1), kind="stable")
    sorted_rows = M[order]
    if np.all(sorted_rows[:-1] >= sorted_rows[1:]):
        return True, order_to_permutation(order)
    return False, None


def first_dominance_failure(M) -> Optional[tuple]:
    """Original indices ``(a, b)`` of the first adjacent pair in row-sum order
    where ``a`` fails to dominate ``b``; ``None`` when the matrix is permuted
    isotonic."""
    M = np.asarray(M, dtype=float)
    order = np.argsort(-M.sum(axis=1), kind="stable")
    bad = np.flatnonzero(~np.all(M[order[:-1]] >= M[order[1:]], axis=1))
    if bad.size == 0:
        return None
    j = int(bad[0])
    return int(order[j]), int(order[j + 1])


def gen_isotonic(n: int, d: int, seed, kind: str = "column-sorted-uniform") -> np.ndarray:
    """Random matrix in the isotonic class (columns non-increasing, values in [0, 1])."""
    if n < 1 or d < 1:
        raise InvalidParameterError("n and d must be positive")
    rng = as_generator(seed)
    if kind == "column-sorted-uniform":
        return -np.sort(-rng.random((n, d)), axis=0)
    if kind == "cumulative-decrements":
        first = rng.random((1, d))
        dec = rng.random((n - 1, d)) * (2.0 / n)
        M = first - np.vstack([np.zeros((1, d)), np.cumsum(dec, axis=0)])
        return np.clip(M, 0.0, 1.0)
    raise InvalidParameterError(f"unknown isotonic generator kind {kind!r}")


def hard_instance_sizes(n: int, d: int, m: int) -> tuple:
    """``(lam, N, K_N, K_d)`` used by :func:`gen_hard_instance`."""
    if m < 1 or n % m:
        raise InvalidParameterError(f"m={m} must be a positive divisor of n={n}")
    lam = 1.0 / m
    N = n // m
    kN = max(min(m * m, n // (2 * m)), 1)
    kd = min(math.ceil(math.sqrt(d) * m), d)
    return lam, N, kN, kd


def gen_hard_instance(n: int, d: int, m: int, seed=None):
    """Stacked-groups instance: ``m`` groups of ``N = n/m`` experts.

    Group ``l`` (1-based) sits at base level ``lam * (l - 1)`` with
    ``lam = 1/m`` and carries a planted ``K_N x K_d`` block of height ``lam``
    on a random column set.  Rows are then shuffled.

    Returns:
        ``(M, pi_star)`` where ``M_{pi_star^{-1}}`` is isotonic.
    """
    lam, N, kN, kd = hard_instance_sizes(n, d, m)
    rng = as_generator(seed)
    groups = []
    # Highest group first so that the stacked matrix is isotonic.
    for level in range(m, 0, -1):
        G = np.full((N, d), lam * (level - 1))
        cols = rng.choice(d, size=kd, replace=False)
        G[np.ix_(np.arange(kN), cols)] += lam
        groups.append(G)
    sorted_M = np.clip(np.vstack(groups), 0.0, 1.0)
    pi_star = rng.permutation(n)
    # sorted_M is M_{pi^{-1}}, so M[i] = sorted_M[pi[i]].
    return sorted_M[pi_star], pi_star.astype(np.intp)


def apply_row_permutation(M, pi, inverse: bool = True) -> np.ndarray:
    """``M_{pi^{-1}}`` (row ``i`` is ``M[pi^{-1}(i)]``) when ``inverse``,
    otherwise ``M_pi`` (row ``i`` is ``M[pi(i)]``)."""
    M = np.asarray(M)
    pi = check_permutation(pi, M.shape[0])
    return M[invert_permutation(pi)] if inverse else M[pi]


def ranking_loss(M, pi_hat, pi_star) -> float:
    """Squared Frobenius distance between ``M_{pi_hat^{-1}}`` and ``M_{pi_star^{-1}}``."""
    M = np.asarray(M, dtype=float)
    oracle = apply_row_permutation(M, pi_star)
    if not is_isotonic(oracle):
        raise InvalidOracleError("pi_star does not sort M into an isotonic matrix")
    return float(np.sum((apply_row_permutation(M, pi_hat) - oracle) ** 2))


def reconstruction_loss(M_hat, M) -> float:
    M_hat = np.asarray(M_hat, dtype=float)
    M = np.asarray(M, dtype=float)
    if M_hat.shape != M.shape:
        raise InvalidParameterError(f"shape mismatch {M_hat.shape} vs {M.shape}")
    return float(np.sum((M_hat - M) ** 2))


def read_matrix(path) -> np.ndarray:
    """Read the plain-text matrix format: ``n d`` then ``n`` rows of ``d`` values."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise InvalidInputError(f"{path}: first line must be 'n d'")
        n, d = int(header[0]), int(header[1])
        values = np.loadtxt(fh, dtype=float, ndmin=2) if n else np.zeros((0, d))
    if values.shape != (n, d):
        raise InvalidInputError(f"{path}: expected {n}x{d} values, found shape {values.shape}")
    return values


def write_matrix(path, A: np.ndarray, integer: Optional[bool] = None) -> None:
    A = np.asarray(A)
    if integer is None:
        integer = np.issubdtype(A.dtype, np.integer)
    fmt = "%d" if integer else "%.17g"
    with open(path, "w") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        np.savetxt(fh, A, fmt=fmt, delimiter=" ")


def read_permutation(path) -> np.ndarray:
    with open(path) as fh:
        values = [int(tok) for tok in fh.read().split()]
    return check_permutation(np.array(values, dtype=np.intp))


def format_permutation(pi: Sequence[int]) -> str:
    return " ".join(str(int(v)) for v in pi)
