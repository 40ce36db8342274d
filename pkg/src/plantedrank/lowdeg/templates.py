"""Bipartite templates indexing permutation-invariant polynomials.

A template has row nodes ``V = {0..r-1}`` and column nodes ``W = {0..s-1}``.
Detection templates have no isolated node. Estimation templates carry a
distinguished row node ``v1 = 0`` that is fixed by every admissible
relabeling and may be isolated.

Canonical form
--------------
Because no column node is isolated, a template is determined up to column
relabeling by the multiset of column neighbourhoods. The canonical code is
the lexicographic minimum, over admissible row relabelings, of the sorted
tuple of relabeled neighbourhoods; canonical edges are read off that code
(column ``j`` gets the ``j``-th neighbourhood).
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..model import InvalidParameterError

MAX_DEGREE = 6
VARIANTS = ("detection", "estimation")

Edge = Tuple[int, int]


def _row_relabelings(r: int, variant: str):
    if variant == "estimation":
        for rest in itertools.permutations(range(1, r)):
            yield (0,) + rest
    else:
        yield from itertools.permutations(range(r))


def _neighbourhoods(s: int, edges) -> List[Tuple[int, ...]]:
    nb: List[List[int]] = [[] for _ in range(s)]
    for v, w in edges:
        nb[w].append(v)
    return [tuple(sorted(x)) for x in nb]


def _code(nbhds, alpha) -> Tuple[Tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(alpha[v] for v in nb)) for nb in nbhds))


def canonical_code(r: int, s: int, edges, variant: str = "detection"):
    nbhds = _neighbourhoods(s, edges)
    return min(_code(nbhds, alpha) for alpha in _row_relabelings(r, variant))


def aut_count(r: int, s: int, edges, variant: str = "detection") -> int:
    """Number of edge-preserving pairs ``(tau_v, tau_w)`` (``tau_v(v1) = v1`` for estimation).

    For each admissible ``tau_v`` leaving the neighbourhood multiset unchanged,
    the compatible ``tau_w`` are exactly the permutations within groups of
    columns sharing a neighbourhood.
    """
    nbhds = _neighbourhoods(s, edges)
    if any(len(nb) == 0 for nb in nbhds):
        raise InvalidParameterError("column nodes must not be isolated")
    base = tuple(sorted(nbhds))
    per_row_perm = math.prod(math.factorial(c) for c in Counter(nbhds).values())
    hits = sum(1 for alpha in _row_relabelings(r, variant) if _code(nbhds, alpha) == base)
    return hits * per_row_perm


def _components(r: int, s: int, edges) -> List[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[Edge, ...]]]:
    """Edge-carrying connected components as ``(rows, cols, edges)``, ordered by smallest edge."""
    parent = list(range(r + s))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v, w in edges:
        a, b = find(v), find(r + w)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: Dict[int, List[Edge]] = {}
    for e in sorted(edges):
        groups.setdefault(find(e[0]), []).append(e)
    out = []
    for comp_edges in groups.values():
        rows = tuple(sorted({v for v, _ in comp_edges}))
        cols = tuple(sorted({w for _, w in comp_edges}))
        out.append((rows, cols, tuple(comp_edges)))
    return out


@dataclass(frozen=True)
class BipartiteTemplate:
    r: int
    s: int
    edges: Tuple[Edge, ...]
    variant: str = "detection"
    aut: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"variant must be one of {VARIANTS}")
        edges = tuple(sorted((int(v), int(w)) for v, w in self.edges))
        if not edges or len(set(edges)) != len(edges):
            raise InvalidParameterError("a template needs at least one edge and no repeated edge")
        if any(not (0 <= v < self.r and 0 <= w < self.s) for v, w in edges):
            raise InvalidParameterError("edge endpoints out of range")
        used_v = {v for v, _ in edges}
        used_w = {w for _, w in edges}
        allowed = set(range(self.r)) - ({0} if self.variant == "estimation" else set())
        if not allowed <= used_v or used_w != set(range(self.s)):
            raise InvalidParameterError("isolated nodes are not allowed (except v1 for estimation)")
        object.__setattr__(self, "edges", edges)
        if not self.aut:
            object.__setattr__(self, "aut", aut_count(self.r, self.s, edges, self.variant))

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def components(self):
        return _components(self.r, self.s, self.edges)

    @property
    def cc(self) -> int:
        return len(self.components)

    @property
    def v1_isolated(self) -> bool:
        return self.variant == "estimation" and all(v != 0 for v, _ in self.edges)

    @property
    def connected(self) -> bool:
        return self.cc == 1 and not self.v1_isolated

    def canonical(self) -> "BipartiteTemplate":
        code = canonical_code(self.r, self.s, self.edges, self.variant)
        edges = tuple(sorted((v, j) for j, nb in enumerate(code) for v in nb))
        return BipartiteTemplate(self.r, self.s, edges, self.variant, self.aut)

    def countedges_ok(self) -> bool:
        """The three counting inequalities (``cc`` counts edge components only)."""
        r = self.r - (1 if self.v1_isolated else 0)
        return (self.e + self.cc >= r + self.s and min(r, self.s) >= self.cc
                and self.e >= max(r, self.s))

    def to_text(self) -> str:
        body = " ".join(f"{v}-{w}" for v, w in self.edges)
        return f"{self.variant} r={self.r} s={self.s} e={self.e} aut={self.aut} edges: {body}"

    def as_dict(self) -> dict:
        return {"r": self.r, "s": self.s, "e": self.e, "cc": self.cc, "aut": self.aut,
                "variant": self.variant, "edges": [list(e) for e in self.edges]}


def _extensions(t: BipartiteTemplate):
    """Edge sets obtained by adding one edge, possibly on new nodes."""
    r, s, edges = t.r, t.s, set(t.edges)
    for v in range(r + 1):
        for w in range(s + 1):
            if (v, w) in edges:
                continue
            yield r + (v == r), s + (w == s), tuple(sorted(edges | {(v, w)}))


def _seeds(variant: str) -> List[BipartiteTemplate]:
    seeds = [BipartiteTemplate(1, 1, ((0, 0),), variant)]
    if variant == "estimation":
        seeds.append(BipartiteTemplate(2, 1, ((1, 0),), variant))
    return seeds


@dataclass(frozen=True)
class TemplateCatalog:
    D: int
    variant: str
    templates: Tuple[BipartiteTemplate, ...]

    def __len__(self) -> int:
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)

    def census(self, connected_only: bool = False) -> Dict[Tuple[int, int, int], int]:
        counts: Dict[Tuple[int, int, int], int] = Counter()
        for t in self.templates:
            if connected_only and not t.connected:
                continue
            counts[(t.r, t.s, t.e)] += 1
        return dict(counts)

    def to_text(self) -> str:
        return "\n".join(t.to_text() for t in self.templates) + "\n"


_CACHE: Dict[Tuple[int, str], TemplateCatalog] = {}


def enumerate_templates(D: int, variant: str = "detection", cap: int = MAX_DEGREE) -> TemplateCatalog:
    """All templates with ``1 <= |E| <= D`` up to (v1-fixing) isomorphism.

    Templates with ``e`` edges are grown from those with ``e - 1`` edges by
    adding one edge in every possible position; deleting any edge of an
    admissible template (and dropping nodes it isolates, other than ``v1``)
    gives an admissible smaller one, so the growth is exhaustive. Output is
    sorted by ``(e, r, s, edges)``.
    """
    if variant not in VARIANTS:
        raise InvalidParameterError(f"variant must be one of {VARIANTS}")
    if not 1 <= D <= cap:
        raise InvalidParameterError(f"degree D={D} must satisfy 1 <= D <= {cap}")
    key = (D, variant)
    if key in _CACHE:
        return _CACHE[key]
    layer = {t.canonical().edges + ((t.r, t.s),): t.canonical() for t in _seeds(variant)}
    found = dict(layer)
    for _ in range(2, D + 1):
        nxt = {}
        for t in layer.values():
            for r, s, edges in _extensions(t):
                code = canonical_code(r, s, edges, variant)
                k = tuple(sorted((v, j) for j, nb in enumerate(code) for v in nb)) + ((r, s),)
                if k not in nxt:
                    nxt[k] = BipartiteTemplate(r, s, k[:-1], variant)
        found.update(nxt)
        layer = nxt
    templates = sorted(found.values(), key=lambda t: (t.e, t.r, t.s, t.edges))
    catalog = TemplateCatalog(D, variant, tuple(templates))
    _CACHE[key] = catalog
    return catalog


def connected_count_bound(r: int, s: int, e: int) -> Tuple[int, float]:
    """``(binomial bound, 2^(4e) (r^s)^(e-(r+s-1)))`` on connected ``(r, s, e)`` templates."""
    if e + 1 < r + s:
        return 0, 0.0
    excess = e - (r + s - 1)
    lead = math.comb(r + s - 2, r - 1) * math.comb(r + s - 2, s - 1)
    inner = min(math.comb(e - s, r - 1) * s ** excess, math.comb(e - r, s - 1) * r ** excess)
    return lead * inner, 2.0 ** (4 * e) * min(r, s) ** excess
