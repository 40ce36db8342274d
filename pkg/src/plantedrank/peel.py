"""Extract a dominated block capturing most of the energy of a permuted isotonic matrix.

For ``M`` in the permuted isotonic class and a depth ``p >= 1`` the routine
returns ``(lam, S, T)`` with ``lam = 2**-u``, ``M >= lam * 1{S x T}`` and

    8 p log2(min(n, d)) lam^2 |S||T| + 2^(-2p) n d >= ||M||_F^2 .

The construction is: threshold the sorted matrix at ``2**-u`` for every
``u <= p``, keep the level with the largest weighted mass ``|M(u)| 4^-u``,
make the level mask bi-isotonic by sorting its columns, then keep the best
rectangle whose short side is a power of two.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import (BlockSpec, InvalidInputError, InvalidParameterError,
                    is_isotonic, is_permuted_isotonic, order_to_permutation)

TOLERANCE = 1e-9


@dataclass(frozen=True)
class PeelResult:
    """Block found by :func:`peel`.

    ``i_star`` is the dyadic side length along the grid axis (rows when
    ``n <= d``, columns otherwise). ``block.rows`` is empty when ``M = 0``.
    """

    block: BlockSpec
    u_star: int
    i_star: int
    lhs: float
    rhs: float
    checked: bool = True

    @property
    def lam(self) -> float:
        return self.block.lam

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "u_star": self.u_star, "i_star": self.i_star,
                "S": list(self.block.rows), "T": list(self.block.cols),
                "lhs": self.lhs, "rhs": self.rhs, "inequality_checked": self.checked}


def _check_p(p: int) -> None:
    if int(p) != p or p < 1:
        raise InvalidParameterError(f"p must be a positive integer, got {p}")


def level_masks(M, p: int) -> np.ndarray:
    """Stack of masks ``1{M >= 2^-u}`` for ``u = 1..p`` (shape ``p x n x d``)."""
    _check_p(p)
    M = np.asarray(M, dtype=float)
    levels = 2.0 ** -np.arange(1, p + 1)
    return M[None, :, :] >= levels[:, None, None]


def level_select(M, p: int):
    """Return ``(u_star, mask)`` maximizing ``|M(u)| * 4^-u``; smallest ``u`` on ties."""
    M = np.asarray(M, dtype=float)
    if not is_isotonic(M):
        raise InvalidInputError("level_select expects an isotonic matrix")
    masks = level_masks(M, p)
    scores = masks.sum(axis=(1, 2)) * 4.0 ** -np.arange(1, p + 1)
    u = int(np.argmax(scores))  # first maximum, hence smallest u
    return u + 1, masks[u].astype(np.int8)


def dyadic_block(mask):
    """Best dyadic rectangle inside a binary isotonic mask.

    Returns ``(pi_col, i_star, j_star)``. ``pi_col[k]`` is the position of
    column ``k`` once columns are sorted by decreasing column sum (stable);
    in that order every row of the mask is a prefix of ones, of length
    ``j_i``. ``i_star`` maximizes ``i * j_i`` over ``i`` in
    ``{1, 2, 4, ..., 2^floor(log2 n)}``, and the rectangle is the top
    ``i_star`` rows times the first ``j_star`` sorted columns.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2 or not np.all((mask == 0) | (mask == 1)):
        raise InvalidInputError("mask must be a binary 2-d array")
    if not is_isotonic(mask):
        raise InvalidInputError("mask must be isotonic")
    n, d = mask.shape
    col_order = np.argsort(-mask.sum(axis=0), kind="stable")
    pi_col = order_to_permutation(col_order)
    if not mask.any():
        return pi_col, 0, 0
    lengths = mask.sum(axis=1)  # j_i, since sorted rows are prefixes
    grid = [1 << k for k in range(int(math.floor(math.log2(n))) + 1)]
    scores = [i * int(lengths[i - 1]) for i in grid]
    best = int(np.argmax(scores))
    i_star = grid[best]
    return pi_col, i_star, int(lengths[i_star - 1])


def peel(M, p: int, check: bool = True) -> PeelResult:
    """Dominated block with the energy guarantee stated in the module docstring.

    Raises:
        InvalidInputError: if ``M`` is not permuted isotonic.
        AssertionError: if ``check`` and an invariant fails (never expected).
    """
    _check_p(p)
    M = np.asarray(M, dtype=float)
    ok, pi = is_permuted_isotonic(M)
    if not ok:
        raise InvalidInputError("peel expects a permuted isotonic matrix")
    n, d = M.shape
    row_order = np.argsort(pi)
    sorted_M = M[row_order]
    u_star, mask = level_select(sorted_M, p)
    lam = 2.0 ** -u_star

    pi_col, i_star, j_star = dyadic_block(mask)
    col_order = np.argsort(pi_col)
    if n <= d:
        n_rows, n_cols = i_star, j_star
    else:
        # Grid along columns: the transposed bi-isotonic mask is isotonic with
        # rows already in order, so the stable sort inside keeps them fixed.
        bi = mask[:, col_order]
        _, i_star, j_star = dyadic_block(bi.T)
        n_rows, n_cols = j_star, i_star
    S = row_order[:n_rows]
    T = col_order[:n_cols]
    block = BlockSpec(lam, S, T)

    energy = float(np.sum(M ** 2))
    short = min(n, d)
    lhs = 8 * p * math.log2(short) * lam ** 2 * len(S) * len(T) + 2.0 ** (-2 * p) * n * d
    checked = check and short > 1
    if check:
        if len(S) and np.any(M[np.ix_(S, T)] < lam):
            raise AssertionError("peeled block is not dominated by M")
        if short == 1:
            warnings.warn("min(n, d) = 1: energy inequality not checked", RuntimeWarning, stacklevel=2)
        elif lhs + TOLERANCE < energy:
            raise AssertionError(f"energy inequality failed: {lhs} < {energy}")
    return PeelResult(block, u_star, i_star, float(lhs), energy, checked)
