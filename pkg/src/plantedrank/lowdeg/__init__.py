"""Low-degree polynomial calculators."""

from .moments import (PriorSpec, adv_bruteforce, adv_low_degree, corr_star_moment, detection_assumption,
                      detection_risk_lb, estimation_corr_bound, estimation_risk_lb, expected_xstar,
                      mc_gram, mc_moment_check, psi_moment_detection, signal_condition)
from .templates import (BipartiteTemplate, TemplateCatalog, aut_count, canonical_code,
                        connected_count_bound, enumerate_templates)

__all__ = [
    "BipartiteTemplate", "PriorSpec", "TemplateCatalog", "adv_bruteforce", "adv_low_degree",
    "aut_count", "canonical_code", "connected_count_bound", "corr_star_moment", "detection_assumption",
    "detection_risk_lb", "enumerate_templates", "estimation_corr_bound", "estimation_risk_lb",
    "expected_xstar", "mc_gram", "mc_moment_check", "psi_moment_detection", "signal_condition",
]
