"""
Weighted norms and the Poincare inequality
==========================================

The norm of f is never smaller than its ANOVA lower bound, and the
one dimensional ratio int g'^2 / int g^2 never drops below pi^2.
"""

import numpy as np

from effdim import decompose, integrands, weights

scheme = weights.product(2)
for f in (integrands.sine_extremal(3), integrands.linear_sum(3), integrands.exp_product(3)):
    print(f"{f.name:>14}  norm={decompose.weighted_norm(f, scheme):.6f}  gap={decompose.norm_anova_gap(f, scheme):.2e}")

# the sine attains the bound; everything else sits above it
for g in (lambda x: np.sin(np.pi * (x - 0.5)), lambda x: x - 0.5, lambda x: np.cos(3 * np.pi * x)):
    print("ratio / pi^2 =", decompose.poincare_ratio(g) / np.pi**2)

# scaled onto the critical ball, the tail beyond the bound is below eps
f = integrands.prod_centered(2)
print("tail beyond order 1:", decompose.ball_tail_variance(f, scheme, 1), "pi^2/576 =", np.pi**2 / 576)
