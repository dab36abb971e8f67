import numpy as np
import pytest

from diamond_euler.catalog import from_formula
from diamond_euler.errors import ParameterError
from diamond_euler.field import MixedField, VectorField, ddx
from diamond_euler.mollifier import mollify_a
from diamond_euler.norms import combined_norm
from diamond_euler.projector import project_bilinear
from diamond_euler.transport import (TransportProblem, _measure, apply_F_eps, eps_continuation,
                                     picard_solve)


def uniform(grid, c=1.0):
    u = grid.zeros()
    u[grid.K] = c
    return VectorField(MixedField(grid, u), MixedField(grid, grid.zeros()))


def test_apply_F_examples(grid):
    u = from_formula("wave_packet", grid)
    zero = from_formula("zero", grid)
    assert np.all(apply_F_eps(u, zero).stack() == 0)
    c = 0.7
    out = apply_F_eps(uniform(grid, c), u)
    expect = -(VectorField(ddx(u.u), ddx(u.v)) * c).stack()
    assert np.abs(out.stack() - expect).max() < 1e-8 * np.abs(expect).max()
    assert np.allclose(out.stack(), -project_bilinear(uniform(grid, c), u).stack(), atol=1e-15)
    shear = from_formula("shear", grid)
    assert np.abs(apply_F_eps(shear, shear).stack()).max() < 1e-14


def test_uniform_drift_is_a_phase_shift(grid):
    u0 = from_formula("stream_mode", grid)
    prob = TransportProblem(uniform(grid), u0, 0.0, theta0=0.4, beta=1.0)
    sol = picard_solve(prob, 0.1, 20)
    exact = u0.stack() * np.exp(-1j * grid.xi * 0.1)[None, :, None]
    err = VectorField.from_array(grid, sol.states[-1]) - VectorField.from_array(grid, exact)
    th = 0.4 - 0.1
    rel = combined_norm(err, th, 0) / combined_norm(VectorField.from_array(grid, exact), th, 0)
    assert rel <= 1e-6
    assert all(r["alpha"] <= 0.5 for r in sol.restart_log)
    assert sol.restart_log[-1]["t_end"] == pytest.approx(0.1)


def test_zero_initial_data(grid):
    prob = TransportProblem(uniform(grid), from_formula("zero", grid), 0.0)
    sol = picard_solve(prob, 0.1, 5)
    assert np.all(sol.states == 0)


def test_zero_drift_gives_mollified_data(grid):
    u0 = from_formula("wave_packet", grid)
    prob = TransportProblem(from_formula("zero", grid), u0, 0.1)
    sol = picard_solve(prob, 0.1, 5)
    J = mollify_a(grid, u0.stack(), 0.1, 3)
    for s in sol.states:
        assert np.array_equal(s, J)


def test_horizon_is_checked(grid):
    prob = TransportProblem(uniform(grid), from_formula("stream_mode", grid), 0.0, theta0=0.4, beta=4.0)
    with pytest.raises(ParameterError):
        picard_solve(prob, 0.2, 5)
    with pytest.raises(ParameterError):
        picard_solve(prob, 0.0, 5)
    with pytest.raises(ParameterError):
        TransportProblem(uniform(grid), from_formula("stream_mode", grid), -0.1)


def test_eps_continuation_zero_drift(grid):
    u0 = from_formula("wave_packet", grid)
    prob = TransportProblem(from_formula("zero", grid), u0, 0.0, theta0=0.4, beta=1.0, picard_order=0)
    sched = (0.2, 0.1, 0.05)
    final, rep = eps_continuation(prob, sched, 0.05, 4)
    th = 0.4 - 0.05
    Js = [mollify_a(grid, u0.stack(), e, 3) for e in sched]
    expect = [float(_measure(grid, (a - b)[None], th, 0, 0.5)[0]) for a, b in zip(Js, Js[1:])]
    assert rep["distances"] == pytest.approx(expect, rel=1e-12)
    assert rep["monotone"]


def test_eps_continuation_single_entry(grid):
    u0 = from_formula("stream_mode", grid)
    prob = TransportProblem(uniform(grid), u0, 0.0, theta0=0.4, beta=1.0)
    final, rep = eps_continuation(prob, (0.0,), 0.05, 4)
    direct = picard_solve(prob, 0.05, 4)
    assert rep["distances"] == []
    assert np.array_equal(final.states, direct.states)
    with pytest.raises(ParameterError):
        eps_continuation(prob, (0.1, 0.2), 0.05, 4)


def test_eps_continuation_drift_distances_shrink(grid):
    u0 = from_formula("stream_mode", grid)
    prob = TransportProblem(uniform(grid), u0, 0.0, theta0=0.4, beta=1.0)
    _, rep = eps_continuation(prob, (0.2, 0.1, 0.05), 0.05, 4)
    assert rep["monotone"]
