"""
Contours, sampled fields and the analytic norms
===============================================

"""
import numpy as np

from diamond_euler.catalog import from_formula
from diamond_euler.field import make_grid
from diamond_euler.norms import c_norm, combined_norm, d_norm, sobolev_norm

# a diamond path family: J paths up to angle theta_max, Gauss panels of order 16
grid = make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16)
fam = grid.family
print("angles:", fam.angles)
print("nodes per path:", [p.n_nodes for p in fam.paths])

# the contour of the outermost path turns at 1 + i tan(theta)
top = fam.paths[-1]
print("corner near", top.nodes[np.argmax(top.nodes.imag)])

# data are sampled exactly at every node, including the complex ones
f = from_formula("scalar_packet", grid)
for th in (0.0, 0.25, 0.5):
    print(f"theta={th:.2f}  |f|_D,m=1 = {d_norm(f, th, 1).d_norm_m:.6f}")

# the Sobolev part sees only the real segment y >= a
print("||f||_{0, 1/2} =", sobolev_norm(f, 0.5, 0))

# the conoid family keeps a horizontal strip out to Y_max
cgrid = make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16, kind="conoid")
print("|f|_C =", c_norm(from_formula("scalar_packet", cgrid), 0.4, 0).c_norm_m)

w = from_formula("wave_packet", grid)
print("combined norm of a vector field:", combined_norm(w, 0.4, 2))
