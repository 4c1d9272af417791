"""
ANOVA components of test integrands
===================================

Closed moments on a tensor grid, then Mobius inversion, give every
variance component of a low dimensional integrand.
"""

from effdim import decompose, integrands, quadrature

f = integrands.gfunction((0, 0, 3))
vd = decompose.anova_variances(f, quadrature.Midpoint(1024))
for u, v in vd.components.items():
    if u:
        print(f"{str(u):>8}  {v:.6f}")
print("sum of components", vd.component_sum, "variance", vd.sigma2)

# effective dimensions of the same function
for sense in ("truncation", "superposition"):
    print(sense, decompose.effective_dimension(vd, 0.01, sense))
print("mean dimension", decompose.mean_dimension(vd))

# randomized rules report a standard error per component
vd = decompose.anova_variances(integrands.exp_product(4), quadrature.RandomizedHalton(2**12, 16, seed=0))
for u, v in list(vd.components.items())[1:5]:
    print(f"{str(u):>8}  {v:.5f} +- {vd.std_errors[u]:.1e}")
