"""Peeling a block out of an isotonic matrix.

A matrix is isotonic when every column decreases from top to bottom. Given
one (with its rows shuffled), ``peel`` picks a dyadic level ``2^-u`` and a
rectangle ``S x T`` such that every entry of ``M`` on the rectangle is at
least ``2^-u``. The rectangle carries a fixed fraction of the energy up to a
logarithmic factor, which is the inequality ``lhs >= rhs`` printed below.
"""
import numpy as np

from plantedrank.model import gen_isotonic
from plantedrank.peel import peel

rng = np.random.default_rng(3)

for kind in ("column-sorted-uniform", "cumulative-decrements"):
    M = gen_isotonic(32, 48, rng, kind)[rng.permutation(32)]
    res = peel(M, p=5)
    S, T = res.block.rows, res.block.cols
    print(f"{kind}:")
    print(f"  level 2^-{res.u_star} = {res.lam:.4f}, block {len(S)} x {len(T)}")
    print(f"  smallest entry inside the block: {M[np.ix_(S, T)].min():.4f}")
    print(f"  lhs = {res.lhs:9.2f} >= rhs = ||M||_F^2 = {res.rhs:8.2f}")

# A matrix with tiny entries: no level reaches 2^-p, the 2^-2p slack pays.
M = np.full((16, 16), 0.01)
res = peel(M, p=3)
print(f"\nflat 0.01 matrix, p=3: block {res.block.kn} x {res.block.kd}, lhs {res.lhs:.3f} >= rhs {res.rhs:.3f}")
