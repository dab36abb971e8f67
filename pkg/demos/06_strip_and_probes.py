"""
Strip widths and empirical constants
====================================

"""
from diamond_euler.catalog import from_formula
from diamond_euler.diagnostics import (dyadic_pairs, fit_strip, probe_cauchy, probe_projection,
                                       probe_transport_estimates)
from diamond_euler.field import make_grid

grid = make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=32)

# the decay rate of |f(xi, y)| in xi is the width of the strip of analyticity in x
fit = fit_strip(from_formula("scalar_strip", grid), 0.5)
print("fitted delta:", round(fit.delta, 4), "window", fit.fit_window)

# too few resolved modes: the fit reports a lower bound instead
print(fit_strip(from_formula("scalar_mode", grid), 0.5))

pairs = dyadic_pairs(0.4, 0.2, 3)
print("theta pairs:", pairs)
rep = probe_cauchy(from_formula("scalar_packet", grid), pairs, m=1)
print("Cauchy:", rep.constants, rep.passed)

fields = [from_formula(n, grid) for n in ("stream_mode", "wave_packet", "generic")]
rep = probe_projection(fields, pairs, m=1)
print("projection:", rep.constants, rep.passed)

rep = probe_transport_estimates(from_formula("shear", grid), from_formula("stream_mode", grid),
                                0.4, [4.0, 8.0, 16.0])
print("transport: slope of C", round(rep.constants["slope_C"], 2),
      "slope of D", round(rep.constants["slope_D"], 2))
