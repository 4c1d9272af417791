"""
Truncation and superposition bounds for product weights
=======================================================

For weights gamma_j = j^-eta the bounds depend only on eta and eps.
"""

import numpy as np

from effdim import bounds

etas = (2.0, 1.0, 0.0)
epsilons = (0.1, 0.01, 0.001, 0.0001)

# both conventions at once; they disagree only where eps^(-1/eta) is an integer
strict = bounds.effective_dimension_table(etas, epsilons, bounds.Mode.STRICT)
loose = bounds.effective_dimension_table(etas, epsilons, bounds.Mode.NONSTRICT)

print(f"{'eps':>8} {'eta':>4} {'s_T strict':>11} {'s_T':>7} {'s_S':>4}  tie")
for a, c in zip(strict, loose):
    print(f"{a.epsilon:>8g} {a.eta:>4g} {a.trunc:>11} {c.trunc:>7} {c.super:>4}  {'*' if c.trunc_boundary else ''}")

# superposition grows very slowly as eps shrinks
for eps in np.logspace(-4, -40, 5):
    s_t, s_s = bounds.product_dimension_bounds(2.0, eps)
    print(f"eps={eps:.0e}  s_S={s_s.value}  growth bound={bounds.superposition_growth_bound(eps, 2.0):.2f}")
