import math

import numpy as np
import pytest
from oracles import brute_scan_select

from plantedrank.detect import ScanBudgetError
from plantedrank.model import (InvalidParameterError, make_block_matrix, random_block, ranking_loss,
                               is_permuted_isotonic, sample_observations)
from plantedrank.support import (block_scores, est_combined, est_row_sum, est_scan_two_stage, est_two_stage,
                                 rank_block, scan_select)


def test_row_sum_example():
    Y = -np.ones((100, 100), dtype=int)
    Y[0] = 1
    r = est_row_sum(Y, 0.01, 0)
    assert r.statistic == 100 and r.decision == 1
    assert r.threshold == pytest.approx(42.9, abs=0.05)
    assert est_row_sum(-np.ones((5, 5), dtype=int), 0.1, 2).decision == 0


def test_row_sum_threshold_monotone_in_delta():
    Y = np.ones((10, 10), dtype=int)
    assert est_row_sum(Y, 0.01).threshold > est_row_sum(Y, 0.1).threshold > est_row_sum(Y, 0.5).threshold


def test_bad_row():
    with pytest.raises(InvalidParameterError):
        est_row_sum(np.ones((3, 3), dtype=int), 0.1, 3)
    with pytest.raises(InvalidParameterError):
        est_two_stage(np.ones((1, 3), dtype=int), 0.1, 0)


def test_two_stage_empty_selection():
    dec, sel = est_two_stage(-np.ones((6, 6), dtype=int), 0.1, 0)
    assert sel == () and dec.decision == 0


def test_two_stage_leave_one_out(rng):
    for _ in range(50):
        Y = rng.choice([-1, 1], size=(8, 10))
        Y[1:, :4] = 1
        _, sel = est_two_stage(Y, 0.2, 0)
        Y2 = Y.copy()
        Y2[0] = -Y2[0]
        _, sel2 = est_two_stage(Y2, 0.2, 0)
        assert sel == sel2
        _, ss = est_scan_two_stage(Y, 2, 0.2, 0)
        _, ss2 = est_scan_two_stage(Y2, 2, 0.2, 0)
        assert ss == ss2


def test_two_stage_power():
    rng = np.random.default_rng(7)
    n = d = 64
    delta = 0.05
    hits = 0
    R = 300
    for _ in range(R):
        M = np.zeros((n, d))
        M[:, :d // 2] = 1.0  # every row, including row 0, is in the block
        _, sel = est_two_stage(sample_observations(M, rng), delta, 0)
        dec, _ = est_two_stage(sample_observations(M, rng), delta, 0)
        hits += dec.decision
    assert hits / R >= 1 - 2 * delta - 3 * math.sqrt(2 * delta / R)


def test_scan_select_matches_bruteforce(rng):
    for _ in range(30):
        Y = rng.choice([-1, 1], size=(5, 4))
        for row in (0, 3):
            assert scan_select(Y, 2, row) == brute_scan_select(Y, 2, row)


def test_scan_select_complement_path(rng):
    # m > d/2 enumerates complements; results must agree with the oracle.
    for _ in range(20):
        Y = rng.choice([-1, 1], size=(6, 5))
        assert scan_select(Y, 4, 1) == brute_scan_select(Y, 4, 1)


def test_scan_tie_break_lexicographic():
    Y = np.ones((4, 5), dtype=int)
    assert scan_select(Y, 2, 0) == (0, 1)
    assert scan_select(Y, 4, 0) == (0, 1, 2, 3)


def test_scan_all_minus_one_and_errors():
    Y = -np.ones((5, 5), dtype=int)
    assert est_scan_two_stage(Y, 2, 0.1, 0)[0].decision == 0
    with pytest.raises(InvalidParameterError):
        est_scan_two_stage(Y, 5, 0.1, 0)
    with pytest.raises(ScanBudgetError):
        est_scan_two_stage(np.ones((40, 40), dtype=int), 10, 0.1, 0)


def test_combined():
    Y = np.ones((30, 30), dtype=int)
    res = est_combined(Y, 3, 2, 4, 0.1, 0)
    assert res.scan_size == 2 and len(res.parts) == 3
    assert res.decision == int(any(p.decision for p in res.parts)) == 1
    assert est_combined(-Y, 3, 2, 4, 0.1, 0).decision == 0
    d = res.as_dict()
    assert d["row"] == 0 and len(d["parts"]) == 3


def test_rank_block_examples():
    Y = np.array([[1, 1, 1], [-1, -1, -1]])
    assert list(rank_block(Y, 0.1)) == [0, 1]
    assert list(rank_block(Y[::-1], 0.1)) == [1, 0]


def test_rank_block_equivariance(rng):
    for _ in range(20):
        Y = rng.choice([-1, 1], size=(12, 9))
        sc = block_scores(Y, 0.1)
        if len(np.unique(sc)) < len(sc):
            continue
        perm = rng.permutation(12)
        pi = rank_block(Y, 0.1)
        assert np.array_equal(rank_block(Y[perm], 0.1), pi[perm])


def test_rank_block_is_permutation(rng):
    for shape in [(1, 3), (2, 2), (7, 3)]:
        pi = rank_block(rng.choice([-1, 1], size=shape), 0.2)
        assert sorted(pi) == list(range(shape[0]))


def test_rank_block_recovers_strong_block(rng):
    spec = random_block(32, 32, 1.0, 8, 32, rng)
    M = make_block_matrix(spec, 32, 32)
    pi = rank_block(sample_observations(M, rng), 0.05)
    assert ranking_loss(M, pi, is_permuted_isotonic(M)[1]) == 0
