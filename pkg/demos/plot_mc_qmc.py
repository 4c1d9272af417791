"""
Monte Carlo against randomized Halton points
============================================

For a low dimensional additive integrand the low discrepancy points win.
"""

from effdim import integrands, quadrature

for d in (2, 8, 16):
    mc, qmc = quadrature.mc_qmc_rmse(integrands.linear_sum(d), d, 1024, 16, seed=0)
    print(f"d={d:<3} rmse mc {mc:.2e}  qmc {qmc:.2e}")
