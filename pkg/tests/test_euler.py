import math

import numpy as np
import pytest

from diamond_euler.catalog import from_formula
from diamond_euler.errors import DivergenceError, NonConvergenceError, ParameterError
from diamond_euler.euler import (EulerRun, IterationTrace, beta_schedule, difference_norms,
                                 fixed_point_residual, outer_iterate, solve)
from diamond_euler.transport import _cumtrapz, apply_F_a


def test_beta_schedule():
    assert beta_schedule(8, 0) == 4
    assert beta_schedule(8, 1) == 6
    assert beta_schedule(8, 2) == 7
    vals = [beta_schedule(8, n) for n in range(60)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert all(b > a for a, b in zip(vals[:40], vals[1:40]))
    assert vals[-1] == pytest.approx(8)
    with pytest.raises(ParameterError):
        beta_schedule(8, -1)


def test_run_validation(grid):
    u = from_formula("shear", grid)
    with pytest.raises(ParameterError):
        EulerRun(u, m=2)
    with pytest.raises(ParameterError):
        EulerRun(u, theta0=0.4, beta=4.0, T=0.06)
    with pytest.raises(ParameterError):
        EulerRun(u, R=1.0)
    run = EulerRun(u, theta0=0.4, beta=4.0)
    assert run.T == pytest.approx(0.05)
    assert run.theta_bar == pytest.approx(0.2)


def test_outer_iterate_examples(grid):
    shear = from_formula("shear", grid)
    run = EulerRun(shear, theta0=0.4, beta=4.0, T=0.02, n_steps=4)
    held = np.broadcast_to(shear.stack(), (run.times.size, 2) + grid.shape).copy()
    nxt = outer_iterate(run, held)
    assert np.abs(nxt.states - held).max() < 1e-13
    w = from_formula("perturbed_shear", grid)
    run = EulerRun(w, theta0=0.4, beta=4.0, T=0.02, n_steps=4)
    zero = np.zeros((run.times.size, 2) + grid.shape, dtype=complex)
    nxt = outer_iterate(run, zero)
    assert np.all(nxt.states == w.stack()[None])


def test_outer_iterate_small_step_matches_explicit_reference(grid):
    w = from_formula("perturbed_shear", grid)
    errs = []
    for T in (0.004, 0.002):
        run = EulerRun(w, theta0=0.4, beta=4.0, T=T, n_steps=2)
        prev = np.broadcast_to(w.stack(), (run.times.size, 2) + grid.shape).copy()
        nxt = outer_iterate(run, prev).states[-1]
        ref = w.stack() + T * apply_F_a(grid, w.stack(), w.stack(), 0.0)
        errs.append(np.abs(nxt - ref).max())
    # halving T divides an O(T^2) error by about four
    assert errs[1] < errs[0] / 3


def test_steady_shear_converges_at_second_iterate(grid):
    run = EulerRun(from_formula("shear", grid), theta0=0.4, beta=4.0, T=0.02, n_steps=4)
    sol, trace = solve(run)
    assert trace.converged and trace.iterations == 2
    assert trace.rows[1].zeta_weighted_beta == 0.0
    assert np.abs(sol.states - run.u_in.stack()[None]).max() < 1e-13


def test_zero_datum(grid):
    run = EulerRun(from_formula("zero", grid), theta0=0.4, beta=4.0, T=0.02, n_steps=4)
    sol, trace = solve(run)
    assert trace.converged and trace.iterations == 1
    assert np.all(sol.states == 0)


def test_difference_norm_rows(grid):
    w = from_formula("perturbed_shear", grid)
    run = EulerRun(w, theta0=0.4, beta=4.0, T=0.02, n_steps=4)
    nt = run.times.size
    same = np.broadcast_to(w.stack(), (nt, 2) + grid.shape)
    row = difference_norms(same, same, run, 0)
    assert row.zeta_weighted_beta == 0 and row.zeta_weighted_beta_n == 0
    zero = np.zeros_like(same)
    first = difference_norms(same, zero, run, 0)
    again = difference_norms(same, zero, run, 0)
    assert first.zeta_weighted_beta == again.zeta_weighted_beta
    scaled = difference_norms(zero + 3.0 * same, zero, run, 0)
    assert scaled.zeta_weighted_beta == pytest.approx(3.0 * first.zeta_weighted_beta, rel=1e-12)
    assert scaled.zeta_d_part + scaled.zeta_sobolev_part == pytest.approx(scaled.zeta_weighted_beta)


def test_perturbed_shear_contracts(grid):
    w = from_formula("perturbed_shear", grid)
    run = EulerRun(w, theta0=0.4, beta=4.0, T=0.02, n_steps=8)
    sol, trace = solve(run)
    assert trace.converged
    assert all(r < 1 for r in trace.ratios)
    assert fixed_point_residual(run, sol) <= 1e-8 * run.R0
    back = IterationTrace.from_json(trace.to_json())
    assert back.to_json() == trace.to_json()


def test_nonconvergence_is_reported(grid):
    w = from_formula("perturbed_shear", grid)
    run = EulerRun(w, theta0=0.4, beta=4.0, T=0.02, n_steps=4, max_outer=2, outer_tol=1e-15)
    with pytest.raises(NonConvergenceError):
        solve(run)
