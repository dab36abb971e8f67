"""
The half-plane Leray projector on complex contours
==================================================

"""
import numpy as np

from diamond_euler.catalog import from_formula
from diamond_euler.field import make_grid
from diamond_euler.norms import d_norm
from diamond_euler.projector import project, project_bilinear

grid = make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16)
th = 0.5


def dn(w):
    return sum(d_norm(c, th, 0).d_norm_m for c in w.components)


# a generic field: neither divergence free nor tangent to the wall
w = from_formula("generic", grid)
P = project(w)
print("|w|, |Pw|          :", dn(w), dn(P))
print("|P(Pw) - Pw| / |w| :", dn(project(P) - P) / dn(w))
print("div Pw             :", d_norm(P.divergence(), th, 0).d_norm_m)
print("wall residual      :", P.wall_residual())

# gradients are annihilated
g = from_formula("gradient_packet", grid)
print("|P grad phi| / |grad phi| :", dn(project(g)) / dn(g))

# divergence-free fields tangent to the wall pass through unchanged
s = from_formula("wave_packet", grid)
print("|P s - s| / |s| :", dn(project(s) - s) / dn(s))

# the nonlinear term P((v . grad) u), computed with an exact truncated product
b = project_bilinear(s, s)
# on the real path a real field has c_{-k} = conj(c_k)
real = b.u.samples[:, grid.family.real_path.slice]
print("|P((s . grad) s)| =", dn(b), " Hermitian defect =", np.abs(real - real[::-1].conj()).max())
