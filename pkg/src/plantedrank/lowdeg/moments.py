"""Closed-form moments of template polynomials, advantage and correlation bounds.

Detection prior: ``M = lam 1{S x T}`` with ``S``, ``T`` uniform of sizes
``kn``, ``kd``. For a template ``G`` with ``r`` row nodes, ``s`` column
nodes and ``e`` edges, ``P_G`` sums ``prod_{(v,w) in E} Y[sigma(v), tau(w)]``
over all injective labelings and ``Psi_G = P_G / sqrt((n)_r (d)_s |Aut G|)``
has unit variance under ``M = 0``. Its prior mean is

    lam^e (kn)_r (kd)_s / sqrt((n)_r (d)_s |Aut G|),

with ``(x)_k`` the falling factorial, and zero when ``r > kn`` or ``s > kd``.

Estimation prior: rows and columns enter the block independently with
probabilities ``kn/n`` and ``kd/d``. Labelings send ``v1`` to row 0; each
edge component ``G_l`` is centered by ``e_l = lam^|E_l| (kn/n)^|V_l| (kd/d)^|W_l|``
and ``V*(G) = N |Aut* G|`` with ``N = (n-1)_{r-1} (d)_s`` labelings.
With ``x* = 1{0 in S, T nonempty}`` and ``q = kd/d`` the exact moment is

    E[x* Psi*_G] = sqrt(N / |Aut*|) [A - (kn/n) (1-q)^d prod_l (-e_l)],

where ``A = e_1 (1 - kn/n)`` if ``G`` has a single edge component and it
contains ``v1``, and ``A = 0`` otherwise. Dropping the ``T``-nonempty
requirement (``mode="row"``, ``x* = 1{0 in S}``) removes the second term.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..model import InvalidParameterError
from ..rng import as_generator
from .templates import BipartiteTemplate, TemplateCatalog, enumerate_templates

BRUTEFORCE_BUDGET = 10 ** 6
LABELING_BUDGET = 10 ** 5
MODES = ("exact", "row")


@dataclass(frozen=True)
class PriorSpec:
    kind: str
    n: int
    d: int
    lam: float
    kn: int
    kd: int

    def __post_init__(self):
        if self.kind not in ("detection-uniform", "estimation-bernoulli"):
            raise InvalidParameterError(f"unknown prior kind {self.kind!r}")
        if self.n < 1 or self.d < 1:
            raise InvalidParameterError("n and d must be positive")
        if not (1 <= self.kn <= self.n and 1 <= self.kd <= self.d):
            raise InvalidParameterError("need 1 <= kn <= n and 1 <= kd <= d")
        if not 0.0 <= self.lam <= 1.0:
            raise InvalidParameterError("lambda must lie in [0, 1]")

    @classmethod
    def detection(cls, n, d, lam, kn, kd):
        return cls("detection-uniform", n, d, lam, kn, kd)

    @classmethod
    def estimation(cls, n, d, lam, kn, kd):
        return cls("estimation-bernoulli", n, d, lam, kn, kd)


def _log_falling(x: int, k: int) -> float:
    return math.lgamma(x + 1) - math.lgamma(x - k + 1)


def _require(G: BipartiteTemplate, prior: PriorSpec, variant: str, kind: str) -> None:
    if G.variant != variant:
        raise InvalidParameterError(f"expected a {variant} template")
    if prior.kind != kind:
        raise InvalidParameterError(f"expected a {kind} prior")


def psi_moment_detection(G: BipartiteTemplate, prior: PriorSpec) -> float:
    _require(G, prior, "detection", "detection-uniform")
    if G.r > prior.kn or G.s > prior.kd or prior.lam == 0.0:
        return 0.0
    n, d = prior.n, prior.d
    log_val = (G.e * math.log(prior.lam) + _log_falling(prior.kn, G.r) + _log_falling(prior.kd, G.s)
               - 0.5 * (_log_falling(n, G.r) + _log_falling(d, G.s) + math.log(G.aut)))
    return math.exp(log_val)


def adv_low_degree(prior: PriorSpec, D: int, catalog: Optional[TemplateCatalog] = None) -> float:
    """``1 + sum_G E^2[Psi_G]`` over templates with at most ``D`` edges."""
    catalog = catalog or enumerate_templates(D, "detection")
    return 1.0 + math.fsum(psi_moment_detection(G, prior) ** 2 for G in catalog if G.e <= D)


def adv_bruteforce(prior: PriorSpec, D: int, budget: int = BRUTEFORCE_BUDGET) -> float:
    """``1 + sum_{0 < |S| <= D} E^2[Y^S]`` by enumerating cell subsets ``S``."""
    if prior.kind != "detection-uniform":
        raise InvalidParameterError("expected a detection prior")
    n, d = prior.n, prior.d
    cells = n * d
    top = min(D, cells)
    cost = sum(math.comb(cells, k) for k in range(1, top + 1))
    if cost > budget:
        raise InvalidParameterError(f"brute force needs {cost} subsets (budget {budget})")
    terms = []
    for k in range(1, top + 1):
        for S in itertools.combinations(range(cells), k):
            r = len({c // d for c in S})
            s = len({c % d for c in S})
            if r > prior.kn or s > prior.kd:
                continue
            val = (prior.lam ** k * math.exp(_log_falling(prior.kn, r) - _log_falling(n, r)
                                             + _log_falling(prior.kd, s) - _log_falling(d, s)))
            terms.append(val * val)
    return 1.0 + math.fsum(terms)


def detection_assumption(prior: PriorSpec, D: int, cbar: float) -> bool:
    """Whether every signal-strength term is at most ``2^(-2-cbar)``."""
    n, d, lam, kn, kd = prior.n, prior.d, prior.lam, prior.kn, prior.kd
    worst = max(lam * math.sqrt(min(D, kn, kd)), lam * kd / math.sqrt(d),
                lam * kn / math.sqrt(n), lam * kn * kd / math.sqrt(n * d))
    return worst <= 2.0 ** (-2 - cbar)


def detection_risk_lb(adv_sq: float, cbar: Optional[float] = None, prior: Optional[PriorSpec] = None,
                      D: Optional[int] = None) -> dict:
    """Lower bounds on the worst-case risk of any test with squared advantage ``adv_sq``."""
    if adv_sq < 0:
        raise InvalidParameterError("adv_sq must be non-negative")
    out = {"bound": 1.0 / (2.0 * (1.0 + adv_sq)),
           "secondary": (1.0 - (math.sqrt(adv_sq) - 1.0)) / 4.0,
           "certified": None}
    if cbar is not None and prior is not None and D is not None and detection_assumption(prior, D, cbar):
        out["certified"] = 0.25 * (1.0 - 2.0 ** -cbar)
    return out


# -- estimation side ----------------------------------------------------------

def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}")


def expected_xstar(prior: PriorSpec, mode: str = "exact") -> float:
    _check_mode(mode)
    p = prior.kn / prior.n
    if mode == "row":
        return p
    return p * (1.0 - (1.0 - prior.kd / prior.d) ** prior.d)


def _component_means(G: BipartiteTemplate, prior: PriorSpec):
    p, q = prior.kn / prior.n, prior.kd / prior.d
    return [prior.lam ** len(E) * p ** len(V) * q ** len(W) for V, W, E in G.components]


def _labeling_count_star(G: BipartiteTemplate, n: int, d: int) -> float:
    if G.r > n or G.s > d:
        return 0.0
    return math.exp(_log_falling(n - 1, G.r - 1) + _log_falling(d, G.s))


def corr_star_moment(G: BipartiteTemplate, prior: PriorSpec, mode: str = "exact") -> float:
    """``E[x* Psi*_G]`` under the Bernoulli prior (see module docstring)."""
    _require(G, prior, "estimation", "estimation-bernoulli")
    _check_mode(mode)
    N = _labeling_count_star(G, prior.n, prior.d)
    if N == 0.0:
        return 0.0
    p, q = prior.kn / prior.n, prior.kd / prior.d
    means = _component_means(G, prior)
    A = means[0] * (1.0 - p) if (G.cc == 1 and not G.v1_isolated) else 0.0
    if mode == "exact":
        A -= p * (1.0 - q) ** prior.d * math.prod(-m for m in means)
    return math.sqrt(N / G.aut) * A


def estimation_corr_bound(prior: PriorSpec, D: int, c_s: float = 18.0, mode: str = "exact",
                          catalog: Optional[TemplateCatalog] = None):
    """``(raw, inflated)`` with ``raw = E^2[x*] + sum_G E^2[x* Psi*_G]`` and
    ``inflated = raw / (1 - D^(-c_s/4))``."""
    if D < 2:
        raise InvalidParameterError("D must be at least 2")
    if not c_s > 0:
        raise InvalidParameterError("c_s must be positive")
    catalog = catalog or enumerate_templates(D, "estimation")
    raw = expected_xstar(prior, mode) ** 2 + math.fsum(
        corr_star_moment(G, prior, mode) ** 2 for G in catalog if G.e <= D)
    return raw, raw / (1.0 - D ** (-c_s / 4.0))


def estimation_risk_lb(prior: PriorSpec, corr_sq: float, mode: str = "exact") -> float:
    """``max(0, E[x*^2] - corr_sq)``; ``x*`` is binary so ``E[x*^2] = E[x*]``."""
    if corr_sq < 0:
        raise InvalidParameterError("corr_sq must be non-negative")
    return max(0.0, expected_xstar(prior, mode) - corr_sq)


def signal_condition(prior: PriorSpec, D: int, c_s: float) -> bool:
    """Every one of ``kn/n, kd/d, lam kn/sqrt n, lam kd/sqrt d, lam`` is at most ``D^(-8 c_s)``."""
    n, d, lam, kn, kd = prior.n, prior.d, prior.lam, prior.kn, prior.kd
    worst = max(kn / n, kd / d, lam * kn / math.sqrt(n), lam * kd / math.sqrt(d), lam)
    return worst <= D ** (-8.0 * c_s)


# -- Monte Carlo validation ---------------------------------------------------

def _labelings(G: BipartiteTemplate, n: int, d: int, budget: int):
    """Flat cell indices ``(L, e)`` of every labeling (``v1 -> 0`` for estimation)."""
    if G.variant == "estimation":
        count = _labeling_count_star(G, n, d)
        rows = [(0,) + rest for rest in itertools.permutations(range(1, n), G.r - 1)]
    else:
        count = math.exp(_log_falling(n, G.r) + _log_falling(d, G.s)) if G.r <= n and G.s <= d else 0
        rows = list(itertools.permutations(range(n), G.r))
    if count > budget:
        raise InvalidParameterError(f"{int(round(count))} labelings exceed the budget {budget}")
    cols = list(itertools.permutations(range(d), G.s))
    if not rows or not cols:
        raise InvalidParameterError("template does not fit the matrix dimensions")
    R = np.array(rows, dtype=np.intp)
    C = np.array(cols, dtype=np.intp)
    ev = np.array([v for v, _ in G.edges])
    ew = np.array([w for _, w in G.edges])
    cells = (R[:, None, ev] * d + C[None, :, ew]).reshape(-1, G.e)
    return cells


def _sample_prior(prior: PriorSpec, B: int, rng: np.random.Generator):
    n, d = prior.n, prior.d
    if prior.kind == "detection-uniform":
        rows = np.argsort(rng.random((B, n)), axis=1).argsort(axis=1) < prior.kn
        cols = np.argsort(rng.random((B, d)), axis=1).argsort(axis=1) < prior.kd
    else:
        rows = rng.random((B, n)) < prior.kn / n
        cols = rng.random((B, d)) < prior.kd / d
    M = prior.lam * (rows[:, :, None] & cols[:, None, :])
    Y = np.where(rng.random((B, n, d)) < (1.0 + M) / 2.0, 1.0, -1.0).reshape(B, n * d)
    return Y, rows, cols


def _psi_values(G: BipartiteTemplate, prior: PriorSpec, Y: np.ndarray, cells: np.ndarray) -> np.ndarray:
    prods = Y[:, cells]  # (B, L, e)
    if G.variant == "detection":
        total = prods.prod(axis=2).sum(axis=1)
        return total / math.sqrt(cells.shape[0] * G.aut)
    means = _component_means(G, prior)
    index = {e: i for i, e in enumerate(G.edges)}
    term = np.ones(prods.shape[:2])
    for (_, _, E), m in zip(G.components, means):
        idx = [index[e] for e in E]
        term *= prods[:, :, idx].prod(axis=2) - m
    return term.sum(axis=1) / math.sqrt(cells.shape[0] * G.aut)


def _chunk_size(cells: np.ndarray) -> int:
    return max(1, int(4e6 // max(1, cells.size)))


def mc_moment_check(G: BipartiteTemplate, prior: PriorSpec, replicates: int, seed,
                    mode: str = "exact", budget: int = LABELING_BUDGET):
    """Monte Carlo ``(mean, stderr)`` of ``Psi_G`` (detection) or ``x* Psi*_G`` (estimation)."""
    _check_mode(mode)
    kind = "detection-uniform" if G.variant == "detection" else "estimation-bernoulli"
    if prior.kind != kind:
        raise InvalidParameterError(f"a {G.variant} template needs a {kind} prior")
    if replicates < 2:
        raise InvalidParameterError("need at least two replicates")
    rng = as_generator(seed)
    cells = _labelings(G, prior.n, prior.d, budget)
    chunk = _chunk_size(cells)
    vals = []
    done = 0
    while done < replicates:
        B = min(chunk, replicates - done)
        Y, rows, cols = _sample_prior(prior, B, rng)
        psi = _psi_values(G, prior, Y, cells)
        if G.variant == "estimation":
            x = rows[:, 0] if mode == "row" else rows[:, 0] & cols.any(axis=1)
            psi = psi * x
        vals.append(psi)
        done += B
    vals = np.concatenate(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(replicates))


def mc_gram(templates: Sequence[BipartiteTemplate], prior: PriorSpec, replicates: int, seed,
            budget: int = LABELING_BUDGET):
    """Empirical ``E[Psi_G Psi_H]`` matrix and its entrywise standard errors."""
    if replicates < 2:
        raise InvalidParameterError("need at least two replicates")
    rng = as_generator(seed)
    all_cells = [_labelings(G, prior.n, prior.d, budget) for G in templates]
    chunk = min(_chunk_size(c) for c in all_cells)
    k = len(templates)
    s1 = np.zeros((k, k))
    s2 = np.zeros((k, k))
    done = 0
    while done < replicates:
        B = min(chunk, replicates - done)
        Y, _, _ = _sample_prior(prior, B, rng)
        P = np.stack([_psi_values(G, prior, Y, c) for G, c in zip(templates, all_cells)], axis=1)
        prod = P[:, :, None] * P[:, None, :]
        s1 += prod.sum(axis=0)
        s2 += (prod ** 2).sum(axis=0)
        done += B
    mean = s1 / replicates
    var = (s2 / replicates - mean ** 2) * replicates / (replicates - 1)
    return mean, np.sqrt(np.maximum(var, 0.0) / replicates)
