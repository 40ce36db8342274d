"""Low-degree bounds.

For the detection problem, the best degree-D polynomial test has squared
advantage ``1 + sum_G E^2[Psi_G]``, a sum over bipartite templates G with at
most D edges. When it stays close to 1, no such test beats random guessing
by much, and the worst-case risk of every degree-D test is at least
``1 / (2 (1 + adv^2))``.

We print the template census, then the advantage as the signal grows, and
finally the analogous correlation bound for estimating whether the first
expert belongs to the block.
"""
from plantedrank.lowdeg import (PriorSpec, adv_low_degree, detection_risk_lb, enumerate_templates,
                                estimation_corr_bound, estimation_risk_lb, expected_xstar)

print("templates with at most D edges")
for D in range(1, 6):
    det = len(enumerate_templates(D, "detection"))
    est = len(enumerate_templates(D, "estimation"))
    print(f"  D={D}: detection {det:>4}, estimation {est:>4}")

n = d = 1000
kn = kd = 30
print(f"\ndetection, n=d={n}, kn=kd={kn}")
print("  lambda    adv^2 (D=4)   risk lower bound")
for lam in (0.005, 0.01, 0.02, 0.04, 0.08):
    adv = adv_low_degree(PriorSpec.detection(n, d, lam, kn, kd), 4)
    print(f"  {lam:6.3f}   {adv:11.5f}   {detection_risk_lb(adv)['bound']:.4f}")

print(f"\nestimation, n=d={n}, kn=kd={kn}, D=4")
print("  lambda    E[x*]     corr^2 (raw)   risk lower bound")
for lam in (0.01, 0.05, 0.1, 0.3):
    prior = PriorSpec.estimation(n, d, lam, kn, kd)
    raw, inflated = estimation_corr_bound(prior, 4)
    print(f"  {lam:6.3f}   {expected_xstar(prior):.5f}   {raw:.3e}     {estimation_risk_lb(prior, inflated):.5f}")
