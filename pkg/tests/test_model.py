import math

import numpy as np
import pytest

from plantedrank.model import (BlockSpec, InvalidInputError, InvalidOracleError, InvalidParameterError,
                               InvalidSpecError, LossReport, apply_row_permutation, compose,
                               first_dominance_failure, gen_hard_instance, gen_isotonic,
                               hard_instance_sizes, invert_permutation, is_isotonic, is_permuted_isotonic,
                               make_block_matrix, random_block, ranking_loss, read_matrix,
                               read_permutation, reconstruction_loss, sample_observations, write_matrix)


class TestSampling:
    def test_all_ones_is_deterministic(self):
        assert np.all(sample_observations(np.ones((2, 2)), 0) == 1)

    @pytest.mark.parametrize("q", [0.0, 0.3, 1.0])
    def test_frequency(self, q):
        R = 100_000
        Y = sample_observations(np.full((1, R), q), 3)
        target = (1 + q) / 2
        freq = float((Y == 1).mean())
        assert abs(freq - target) <= 4 * math.sqrt(target * (1 - target) / R) + 1e-12

    def test_zero_signal_mean(self):
        Y = sample_observations(np.zeros((1, 100_000)), 4)
        assert abs(Y.mean()) <= 0.02

    def test_half_signal(self):
        Y = sample_observations(np.full((1, 100_000), 0.5), 5)
        assert abs((Y == 1).mean() - 0.75) <= 0.01

    def test_seed_determinism_and_dtype(self):
        M = np.random.default_rng(0).random((5, 7))
        a, b = sample_observations(M, 9), sample_observations(M, 9)
        assert np.array_equal(a, b) and a.dtype == np.int8

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidInputError):
            sample_observations(np.array([[1.5]]), 0)


class TestBlocks:
    def test_small_block(self):
        M = make_block_matrix(BlockSpec(0.5, [0], [0]), 2, 2)
        assert np.array_equal(M, [[0.5, 0], [0, 0]])

    def test_full_block(self):
        assert np.array_equal(make_block_matrix(BlockSpec(1.0, range(3), range(4)), 3, 4), np.ones((3, 4)))

    def test_out_of_range(self):
        with pytest.raises(InvalidSpecError):
            make_block_matrix(BlockSpec(0.5, [3], [0]), 3, 3)

    def test_lambda_range(self):
        with pytest.raises(InvalidSpecError):
            BlockSpec(0.0, [0], [0])
        with pytest.raises(InvalidSpecError):
            BlockSpec(1.1, [0], [0])

    def test_random_blocks_are_permuted_isotonic(self, rng):
        for _ in range(50):
            spec = random_block(9, 7, 0.3, 4, 2, rng)
            assert spec.kn == 4 and spec.kd == 2
            ok, pi = is_permuted_isotonic(make_block_matrix(spec, 9, 7))
            assert ok and is_isotonic(apply_row_permutation(make_block_matrix(spec, 9, 7), pi))

    def test_random_block_sizes(self, rng):
        with pytest.raises(InvalidParameterError):
            random_block(3, 3, 0.5, 4, 1, rng)


class TestIsotonic:
    def test_examples(self):
        assert is_isotonic([[1, 1], [0, 0]])
        assert not is_isotonic([[0, 1], [1, 0]])
        assert is_isotonic([[0.2, 0.7]])

    def test_permuted(self):
        ok, pi = is_permuted_isotonic(np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert ok and list(pi) == [1, 0]
        assert is_permuted_isotonic(np.array([[0.0, 1.0], [1.0, 0.0]])) == (False, None)

    def test_first_failure_reports_original_indices(self):
        M = np.array([[0.0, 1.0], [0.9, 0.9], [1.0, 0.0]])
        assert first_dominance_failure(M) is not None
        assert first_dominance_failure(np.ones((3, 2))) is None

    @pytest.mark.parametrize("kind", ["column-sorted-uniform", "cumulative-decrements"])
    def test_generators(self, kind, rng):
        for n in (1, 2, 7):
            M = gen_isotonic(n, 5, rng, kind)
            assert is_isotonic(M) and M.min() >= 0 and M.max() <= 1
        a = gen_isotonic(6, 4, 77, kind)
        b = gen_isotonic(6, 4, 77, kind)
        assert np.array_equal(a, b)

    def test_shuffled_generator_outputs_are_recognized(self, rng):
        for _ in range(100):
            M = gen_isotonic(8, 5, rng)[rng.permutation(8)]
            ok, pi = is_permuted_isotonic(M)
            assert ok and is_isotonic(apply_row_permutation(M, pi))

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameterError):
            gen_isotonic(2, 2, 0, "nope")


class TestHardInstance:
    def test_sizes(self):
        assert hard_instance_sizes(8, 4, 2) == (0.5, 4, 2, 4)

    def test_structure(self):
        M, pi = gen_hard_instance(8, 4, 2, seed=1)
        ok, _ = is_permuted_isotonic(M)
        assert ok and M.max() <= 1.0
        sorted_M = apply_row_permutation(M, pi)
        assert is_isotonic(sorted_M)
        assert set(np.unique(sorted_M)) <= {0.0, 0.5, 1.0}
        # bottom group base 0, top group base 0.5
        assert sorted_M[4:].min() == 0.0 and sorted_M[:4].min() == 0.5

    def test_single_group_is_block(self):
        M, pi = gen_hard_instance(6, 9, 1, seed=2)
        assert set(np.unique(M)) <= {0.0, 1.0}
        assert is_permuted_isotonic(M)[0]

    def test_many_groups(self, rng):
        for m in (1, 2, 4, 8):
            M, pi = gen_hard_instance(64, 64, m, rng)
            assert M.max() <= 1.0 + 1e-12 and is_isotonic(apply_row_permutation(M, pi))

    def test_divisibility(self):
        with pytest.raises(InvalidParameterError):
            gen_hard_instance(7, 4, 2)


class TestPermutations:
    def test_identity_and_swap(self):
        M = np.array([[1.0, 1.0], [0.0, 0.0]])
        assert np.array_equal(apply_row_permutation(M, [0, 1]), M)
        assert np.array_equal(apply_row_permutation(M, [1, 0]), M[::-1])

    def test_round_trip(self, rng):
        for _ in range(100):
            M = rng.random((6, 3))
            pi = rng.permutation(6)
            back = apply_row_permutation(apply_row_permutation(M, pi, True), pi, False)
            assert np.array_equal(back, M)

    def test_group_action(self, rng):
        for _ in range(50):
            M = rng.random((7, 2))
            pi, sigma = rng.permutation(7), rng.permutation(7)
            twice = apply_row_permutation(apply_row_permutation(M, pi), sigma)
            assert np.array_equal(twice, apply_row_permutation(M, compose(sigma, pi)))

    def test_length_mismatch(self):
        with pytest.raises(InvalidParameterError):
            apply_row_permutation(np.zeros((3, 1)), [0, 1])
        with pytest.raises(InvalidParameterError):
            apply_row_permutation(np.zeros((2, 1)), [0, 0])

    def test_invert(self, rng):
        pi = rng.permutation(10)
        assert np.array_equal(invert_permutation(pi)[pi], np.arange(10))


class TestLosses:
    def test_ranking_loss_examples(self):
        M = np.array([[1.0, 1.0], [0.0, 0.0]])
        assert ranking_loss(M, [0, 1], [0, 1]) == 0
        assert ranking_loss(M, [1, 0], [0, 1]) == 4

    def test_invalid_oracle(self):
        M = np.array([[1.0, 1.0], [0.0, 0.0]])
        with pytest.raises(InvalidOracleError):
            ranking_loss(M, [0, 1], [1, 0])

    def test_loss_independent_of_oracle_choice(self, rng):
        for _ in range(30):
            base = gen_isotonic(5, 4, rng)
            M = np.vstack([base, base[1:3]])  # duplicated rows give several oracles
            ok, pi1 = is_permuted_isotonic(M)
            order = np.argsort(pi1)
            # swap two equal rows in the oracle order
            i = int(np.flatnonzero(np.all(M[order[:-1]] == M[order[1:]], axis=1))[0])
            order2 = order.copy()
            order2[[i, i + 1]] = order2[[i + 1, i]]
            pi2 = invert_permutation(order2)
            pi_hat = rng.permutation(M.shape[0])
            assert ranking_loss(M, pi_hat, pi1) == ranking_loss(M, pi_hat, pi2)
            assert ranking_loss(M, pi2, pi1) == 0

    def test_reconstruction_loss(self):
        M = np.zeros((3, 3))
        assert reconstruction_loss(M, M) == 0
        assert reconstruction_loss(M + 0.1, M) == pytest.approx(0.09)
        assert reconstruction_loss(M, M + 0.1) == reconstruction_loss(M + 0.1, M)
        with pytest.raises(InvalidParameterError):
            reconstruction_loss(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_loss_report(self):
        with pytest.raises(ValueError):
            LossReport(-1.0, 0.0)


class TestFiles:
    def test_matrix_round_trip(self, tmp_path, rng):
        M = rng.random((4, 3))
        write_matrix(tmp_path / "m.txt", M)
        assert np.array_equal(read_matrix(tmp_path / "m.txt"), M)
        Y = sample_observations(M, 1).astype(int)
        write_matrix(tmp_path / "y.txt", Y)
        assert (tmp_path / "y.txt").read_text().splitlines()[0] == "4 3"
        assert np.array_equal(read_matrix(tmp_path / "y.txt"), Y)

    def test_single_row(self, tmp_path):
        write_matrix(tmp_path / "r.txt", np.array([[0.5, 0.25]]))
        assert read_matrix(tmp_path / "r.txt").shape == (1, 2)

    def test_bad_header(self, tmp_path):
        (tmp_path / "b.txt").write_text("2 2\n1 2\n")
        with pytest.raises(InvalidInputError):
            read_matrix(tmp_path / "b.txt")

    def test_permutation(self, tmp_path):
        (tmp_path / "p.txt").write_text("2 0 1\n")
        assert list(read_permutation(tmp_path / "p.txt")) == [2, 0, 1]
        (tmp_path / "q.txt").write_text("0 0\n")
        with pytest.raises(InvalidParameterError):
            read_permutation(tmp_path / "q.txt")
