"""
Regularizing with the rational mollifier
========================================

"""
import numpy as np

from diamond_euler.catalog import from_formula
from diamond_euler.diagnostics import probe_mollifier
from diamond_euler.field import MixedField, make_grid
from diamond_euler.mollifier import MollifierKernel, kernel_eval, mollify
from diamond_euler.norms import sobolev_norm

# the kernel A / (1 + y^2)^2 has unit mass and stays bounded on sectors
k = MollifierKernel()
print("mass:", k.antiderivative(1e12) - k.antiderivative(-1e12))
y = 10 * np.exp(1.2j)
print("|I(10 e^{1.2i})| (1 + 100) =", abs(kernel_eval(y)) * 101)

grid = make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16)
s = grid.zeros()
s[grid.K + 1] = s[grid.K - 1] = np.exp(-grid.family.nodes ** 2)
f = MixedField(grid, s)

# J_eps f -> f as eps -> 0
prev = None
for eps in (0.2, 0.1, 0.05, 0.025):
    e = sobolev_norm(mollify(f, eps, 3) - f, 0.5, 2)
    rate = "" if prev is None else f"  order {np.log2(prev / e):.2f}"
    print(f"eps={eps:<6} ||J f - f||_2,1/2 = {e:.3e}{rate}")
    prev = e

# conoid norm of J_eps f against diamond and Sobolev norms of f
kw = dict(theta_max=0.6, J=8, nodes_per_segment=64, K=64)
gd, gc = make_grid(**kw), make_grid(kind="conoid", **kw)
rep = probe_mollifier(from_formula("scalar_ramp", gd), from_formula("scalar_ramp", gc),
                      (0.2, 0.1, 0.05, 0.025), 0.4)
for row in rep.sweep:
    print(f"eps={row['eps']:<6} C(eps) = {row['C']:.4g}")
print("log C against 1/eps: slope", round(rep.constants["slope"], 3), "R^2", round(rep.constants["r2"], 3))
