"""
Isotonic regression on a pre-order
==================================

Fit the closest order-preserving vector to noisy data on a small grid,
then check the fit against the slow projection oracle.
"""

import numpy as np

from isocone import build_preorder, grid_preorder, isotonic_regression, oracle_projection

# a 3x3 grid ordered coordinatewise; elements are 1-based (row, col) tuples
p = grid_preorder([3, 3])
print(p.elements)

rng = np.random.default_rng(0)
truth = np.add.outer(np.arange(3.0), np.arange(3.0)).ravel()
noisy = truth + rng.normal(scale=0.8, size=9)

fit = isotonic_regression(p, noisy)
print(np.round(fit.fitted.reshape(3, 3), 3))
print("blocks:", [b.tolist() for b in fit.blocks])
print("objective:", fit.objective)

# the alternating-projection oracle is slow but independent
slow = oracle_projection(p, noisy, tol=1e-12)
print("max gap to oracle:", np.abs(slow - fit.fitted).max())

# cycles are allowed: a and b are equivalent, so they share a fitted value
q = build_preorder("abc", [("a", "b"), ("b", "a"), ("b", "c")])
print(isotonic_regression(q, [1.0, 3.0, 5.0], [1.0, 1.0, 2.0]).fitted)
