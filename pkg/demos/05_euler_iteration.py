"""
Nonlinear Euler by outer iteration
==================================

"""
from diamond_euler.catalog import from_formula
from diamond_euler.euler import EulerRun, beta_schedule, fixed_point_residual, solve, solve_auto
from diamond_euler.field import make_grid

grid = make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16)

# the rates used along the iteration approach beta from below
print([beta_schedule(8, n) for n in range(5)])

# a steady shear is reproduced after one step
run = EulerRun(from_formula("shear", grid), theta0=0.4, beta=2.0, T=0.1, n_steps=10)
sol, trace = solve(run)
print("shear: iterations", trace.iterations, "last zeta", trace.rows[-1].zeta_weighted_beta)

# a perturbed shear contracts; each row records the weighted difference norm
w = from_formula("perturbed_shear", grid)
run = EulerRun(w, theta0=0.4, beta=4.0, T=0.02, n_steps=8)
sol, trace = solve(run)
for r in trace.rows:
    print(f"n={r.n}  zeta={r.zeta_weighted_beta:.3e}  ratio={r.ratio}")
print("fixed point residual / R0:", fixed_point_residual(run, sol) / run.R0)

# let the solver find a contracting beta by doubling
strong = from_formula({"name": "perturbed_shear", "perturbation": 0.5}, grid)
sol, trace, run, path = solve_auto(dict(u_in=strong, theta0=0.4, n_steps=8), T_bar=0.8)
print(path)
