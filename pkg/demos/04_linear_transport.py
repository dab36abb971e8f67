"""
The linearized problem by Picard iteration
==========================================

"""
import numpy as np

from diamond_euler.catalog import from_formula
from diamond_euler.field import MixedField, VectorField, make_grid
from diamond_euler.norms import combined_norm
from diamond_euler.transport import TransportProblem, eps_continuation, picard_solve

grid = make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16)
u0 = from_formula("stream_mode", grid)

# a uniform drift (1, 0) only shifts the phase of every mode
ones = grid.zeros()
ones[grid.K] = 1.0
drift = VectorField(MixedField(grid, ones), MixedField(grid, grid.zeros()))
sol = picard_solve(TransportProblem(drift, u0, 0.0, theta0=0.4, beta=1.0), 0.1, 20)

exact = VectorField.from_array(grid, u0.stack() * np.exp(-1j * grid.xi * 0.1)[None, :, None])
err = VectorField.from_array(grid, sol.states[-1]) - exact
print("relative error:", combined_norm(err, 0.3, 3) / combined_norm(exact, 0.3, 3))

# restarts keep alpha = L t at or below 1/2
for r in sol.restart_log[:3]:
    print(r)

# a shear drift, with the regularization removed step by step
prob = TransportProblem(from_formula("shear", grid), u0, 0.0, theta0=0.4, beta=4.0)
final, rep = eps_continuation(prob, (0.2, 0.1, 0.05, 0.0), 0.05, 8)
print("distances between successive eps:", [f"{d:.2e}" for d in rep["distances"]])
