import numpy as np
import pytest

from plantedrank.montecarlo import RiskEstimate, mean_ci, run_replicates, wilson_half_width, worker_count
from plantedrank.rng import RngSeed, as_generator, derive_seed, fnv1a64, splitmix64


def test_splitmix_reference_values():
    # First outputs of the reference splitmix64 generator seeded with 0.
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C


def test_derivation_is_deterministic_and_separates_tags():
    assert derive_seed(7, 3, "x") == derive_seed(7, 3, "x")
    assert derive_seed(7, 3, "x") != derive_seed(7, 3, "y")
    assert derive_seed(7, 3, "x") != derive_seed(7, 4, "x")
    assert derive_seed(7, 3, "x") != derive_seed(8, 3, "x")
    a = RngSeed(7).generator(3, "x").random(5)
    b = RngSeed(7).generator(3, "x").random(5)
    assert np.array_equal(a, b)


def test_seed_range():
    with pytest.raises(ValueError):
        RngSeed(-1)
    with pytest.raises(ValueError):
        RngSeed(2 ** 64)


def test_as_generator_accepts_all_forms():
    g = np.random.default_rng(1)
    assert as_generator(g) is g
    assert isinstance(as_generator(RngSeed(1)), np.random.Generator)
    assert isinstance(as_generator(5), np.random.Generator)


def test_parallel_equals_serial(monkeypatch):
    monkeypatch.setenv("PLANTEDRANK_THREADS", "4")
    fn = lambda rng, i: (i, float(rng.random()))
    serial = run_replicates(fn, 50, 11, "t", workers=1)
    threaded = run_replicates(fn, 50, 11, "t", workers=4)
    assert serial == threaded
    assert [i for i, _ in serial] == list(range(50))


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("PLANTEDRANK_THREADS", "1")
    assert worker_count(8) == 1
    assert worker_count(None) == 1


def test_risk_estimate_and_intervals():
    est = RiskEstimate.from_losses([0, 1, 0, 0])
    assert est.mean == 0.25 and est.replicates == 4 and est.half_width > 0
    assert RiskEstimate.from_losses([1]).half_width == 0.5
    assert wilson_half_width(0.0, 1000) > 0
    with pytest.raises(ValueError):
        RiskEstimate(1.5, 3, 0.1)
    m, h = mean_ci([1.0])
    assert m == 1.0 and h is None
    m, h = mean_ci([1.0, 3.0])
    assert m == 2.0 and h > 0
