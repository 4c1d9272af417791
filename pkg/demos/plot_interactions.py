"""
Which interactions can matter
=============================

Every component variance of a function in the critical ball is bounded
by rho*^2 gamma_u / pi^(2|u|).  Listing the subsets whose bound reaches eps
shows where the variance can live.
"""

from effdim import bounds, weights

scheme = weights.product(2)
print("rho* =", bounds.critical_radius(scheme, weights.INF).rho)

for eps in (0.01, 0.001):
    found = bounds.important_subsets(scheme, 10, eps, max_order=3)
    pairs = [str(u) for u, _ in found if len(u) == 2]
    print(f"eps={eps}: {sum(len(u) == 1 for u, _ in found)} singletons, pairs {pairs}")

# slower decay keeps many more singletons in play
found = bounds.important_subsets(weights.product(1), 100, 0.01, max_order=2)
print("eta=1:", sum(len(u) == 1 for u, _ in found), "singletons and",
      sum(len(u) == 2 for u, _ in found), "pairs")
