
import pytest
from oracles import exact_corr_star

from plantedrank.lowdeg import (BipartiteTemplate, PriorSpec, adv_bruteforce, adv_low_degree, corr_star_moment,
                                detection_risk_lb, enumerate_templates, estimation_corr_bound,
                                estimation_risk_lb, expected_xstar, mc_moment_check, psi_moment_detection,
                                signal_condition)
from plantedrank.model import InvalidParameterError

EDGE = BipartiteTemplate(1, 1, [(0, 0)])
EDGE_STAR = BipartiteTemplate(1, 1, [(0, 0)], "estimation")


def test_single_edge_detection_moment():
    assert psi_moment_detection(EDGE, PriorSpec.detection(2, 2, 0.5, 1, 1)) == pytest.approx(0.25)


def test_adv_spot_values():
    prior = PriorSpec.detection(2, 2, 0.5, 1, 1)
    assert adv_low_degree(prior, 1) == pytest.approx(1.0625)
    assert adv_bruteforce(prior, 1) == pytest.approx(1.0625)


def test_zero_signal():
    prior = PriorSpec.detection(4, 4, 0.0, 2, 2)
    assert all(psi_moment_detection(G, prior) == 0 for G in enumerate_templates(3))
    assert adv_low_degree(prior, 3) == 1.0
    eprior = PriorSpec.estimation(4, 4, 0.0, 2, 2)
    assert all(corr_star_moment(G, eprior, "row") == 0 for G in enumerate_templates(3, "estimation"))


def test_template_larger_than_block():
    star = BipartiteTemplate(1, 3, [(0, 0), (0, 1), (0, 2)])
    assert psi_moment_detection(star, PriorSpec.detection(5, 5, 1.0, 2, 2)) == 0


def test_adv_matches_bruteforce_small():
    for n, d in [(2, 3), (3, 3)]:
        for D in (1, 2, 3):
            prior = PriorSpec.detection(n, d, 0.7, 2, 2)
            assert abs(adv_low_degree(prior, D) - adv_bruteforce(prior, D)) < 1e-9


def test_bruteforce_budget():
    with pytest.raises(InvalidParameterError):
        adv_bruteforce(PriorSpec.detection(10, 10, 0.5, 2, 2), 4)


def test_corr_star_single_edge():
    prior = PriorSpec.estimation(4, 4, 0.5, 2, 2)
    assert corr_star_moment(EDGE_STAR, prior, "row") == pytest.approx(0.125)
    # sqrt(d) * [e1 (1 - p) + p (1 - q)^d e1] with e1 = 0.125, p = q = 1/2
    exact = 2 * (0.125 * 0.5 + 0.5 * 0.5 ** 4 * 0.125)
    assert corr_star_moment(EDGE_STAR, prior, "exact") == pytest.approx(exact)


@pytest.mark.parametrize("mode", ["exact", "row"])
def test_corr_star_matches_exhaustive_oracle(mode):
    prior = PriorSpec.estimation(3, 3, 0.6, 1, 2)
    for G in enumerate_templates(2, "estimation"):
        ours = corr_star_moment(G, prior, mode)
        assert abs(ours - exact_corr_star(G, 3, 3, 0.6, 1, 2, mode)) < 1e-12, G.to_text()


def test_two_component_template_row_mode_zero():
    G = BipartiteTemplate(2, 2, [(0, 0), (1, 1)], "estimation")
    assert corr_star_moment(G, PriorSpec.estimation(4, 4, 0.5, 2, 2), "row") == 0


def test_expected_xstar():
    prior = PriorSpec.estimation(4, 4, 0.5, 2, 2)
    assert expected_xstar(prior, "row") == 0.5
    assert expected_xstar(prior) == pytest.approx(0.5 * (1 - 0.5 ** 4))


def test_detection_risk_lb():
    assert detection_risk_lb(1.0)["bound"] == 0.25
    assert detection_risk_lb(0.0)["bound"] == 0.5
    prior = PriorSpec.detection(10 ** 6, 10 ** 6, 1e-4, 1, 1)
    out = detection_risk_lb(1 + 2 ** -10, cbar=1.0, prior=prior, D=2)
    assert out["bound"] >= (1 - 2 ** -10) / 4
    assert out["certified"] == pytest.approx(0.125)
    with pytest.raises(InvalidParameterError):
        detection_risk_lb(-1.0)


def test_estimation_risk_lb():
    prior = PriorSpec.estimation(8, 8, 0.5, 2, 2)
    ex = expected_xstar(prior)
    assert estimation_risk_lb(prior, ex ** 2) == pytest.approx(ex * (1 - ex))
    assert estimation_risk_lb(prior, 1.0) == 0.0


def test_corr_bound_inflation():
    prior = PriorSpec.estimation(50, 50, 0.05, 2, 2)
    raw, infl = estimation_corr_bound(prior, 3, c_s=18)
    assert raw >= expected_xstar(prior) ** 2
    assert infl == pytest.approx(raw / (1 - 3 ** -4.5))
    with pytest.raises(InvalidParameterError):
        estimation_corr_bound(prior, 1)


def test_signal_condition():
    assert not signal_condition(PriorSpec.estimation(4, 4, 0.5, 2, 2), 2, 1)
    assert signal_condition(PriorSpec.estimation(10 ** 9, 10 ** 9, 1e-6, 1, 1), 2, 0.5)


def test_prior_validation():
    with pytest.raises(InvalidParameterError):
        PriorSpec.detection(4, 4, 0.5, 5, 1)
    with pytest.raises(InvalidParameterError):
        PriorSpec.detection(4, 4, 1.5, 1, 1)
    with pytest.raises(InvalidParameterError):
        psi_moment_detection(EDGE_STAR, PriorSpec.detection(4, 4, 0.5, 1, 1))


def test_mc_moment_check_small():
    prior = PriorSpec.detection(4, 4, 0.8, 2, 2)
    mean, se = mc_moment_check(EDGE, prior, 20_000, 11)
    assert abs(mean - psi_moment_detection(EDGE, prior)) <= 4 * se


def test_mc_labeling_budget():
    G = BipartiteTemplate(3, 3, [(0, 0), (1, 1), (2, 2)])
    with pytest.raises(InvalidParameterError):
        mc_moment_check(G, PriorSpec.detection(30, 30, 0.5, 2, 2), 10, 0, budget=10)
