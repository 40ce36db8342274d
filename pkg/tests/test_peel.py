import math
import warnings

import numpy as np
import pytest

from plantedrank.model import InvalidInputError, InvalidParameterError, gen_isotonic, is_isotonic
from plantedrank.peel import dyadic_block, level_masks, level_select, peel


def test_level_select_all_ones():
    u, mask = level_select(np.ones((4, 5)), 3)
    assert u == 1 and mask.all()


def test_level_select_zero():
    u, mask = level_select(np.zeros((3, 3)), 4)
    assert u == 1 and not mask.any()


def test_level_select_prefers_weighted_score():
    # One entry at 1 against many entries at 1/8: plain mask size would pick u=3.
    M = np.full((4, 4), 0.125)
    M[0, 0] = 1.0
    u, _ = level_select(M, 3)
    scores = [(M >= 2.0 ** -k).sum() * 4.0 ** -k for k in (1, 2, 3)]
    assert u == 1 + int(np.argmax(scores))


def test_masks_nested_and_isotonic(rng):
    M = gen_isotonic(9, 7, rng)
    masks = level_masks(M, 5)
    for u in range(4):
        assert np.all(masks[u] <= masks[u + 1])
    for mk in masks:
        assert is_isotonic(mk.astype(float))


def test_level_select_requires_isotonic():
    with pytest.raises(InvalidInputError):
        level_select(np.array([[0.0], [1.0]]), 2)
    with pytest.raises(InvalidParameterError):
        level_select(np.ones((2, 2)), 0)


def test_dyadic_full_mask():
    pi_col, i, j = dyadic_block(np.ones((6, 5), dtype=int))
    assert list(pi_col) == list(range(5)) and i == 4 and j == 5


def test_dyadic_single_cell():
    mask = np.zeros((3, 3), dtype=int)
    mask[0, 0] = 1
    assert dyadic_block(mask)[1:] == (1, 1)


def test_dyadic_empty():
    assert dyadic_block(np.zeros((3, 4), dtype=int))[1:] == (0, 0)


def test_dyadic_block_inside_mask(rng):
    for _ in range(100):
        mask = (gen_isotonic(11, 8, rng) >= 0.5).astype(int)
        pi_col, i, j = dyadic_block(mask)
        bi = mask[:, np.argsort(pi_col)]
        assert np.all(bi[:, :-1] >= bi[:, 1:]) and np.all(bi[:-1] >= bi[1:])
        assert bi[:i, :j].all()


def test_peel_all_ones():
    res = peel(np.ones((8, 8)), 3)
    assert res.lam == 0.5 and res.block.kn == 8 and res.block.kd == 8
    assert res.lhs == 8 * 3 * 3 * 0.25 * 64 + 2 ** -6 * 64 == 1153
    assert res.rhs == 64


def test_peel_zero():
    res = peel(np.zeros((4, 6)), 2)
    assert res.block.kn == 0 and res.lhs == 2 ** -4 * 24 and res.rhs == 0


def test_peel_rejects_non_isotonic():
    with pytest.raises(InvalidInputError):
        peel(np.array([[0.0, 1.0], [1.0, 0.0]]), 2)


@pytest.mark.parametrize("n,d", [(8, 16), (16, 8), (12, 12), (5, 40), (40, 5)])
def test_peel_invariants(n, d, rng):
    for t in range(60):
        kind = "cumulative-decrements" if t % 2 else "column-sorted-uniform"
        p = 1 + t % 6
        M = gen_isotonic(n, d, rng, kind)[rng.permutation(n)]
        res = peel(M, p)
        S, T = res.block.rows, res.block.cols
        if S:
            assert np.all(M[np.ix_(S, T)] >= res.lam)
        assert res.lhs + 1e-9 >= res.rhs
        assert res.lam == 2.0 ** -res.u_star
        grid_side = len(S) if n <= d else len(T)
        assert grid_side == res.i_star and (res.i_star & (res.i_star - 1)) == 0


def test_peel_degenerate_dimension_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = peel(np.array([[0.9, 0.3, 0.0]]), 2)
    assert any("not checked" in str(w.message) for w in caught)
    assert not res.checked and np.all(np.array([[0.9, 0.3, 0.0]])[0, list(res.block.cols)] >= res.lam)


def test_peel_small_values():
    M = np.full((8, 8), 0.01)
    res = peel(M, 3)
    # Nothing reaches 1/8; the 2^(-2p) term covers the energy.
    assert res.block.kn == 0 and res.lhs >= res.rhs
    assert math.isclose(res.rhs, 64 * 1e-4)
