import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diamond_euler import diagnostics as D
from diamond_euler.catalog import from_formula
from diamond_euler.errors import DataError, ResolutionError
from diamond_euler.euler import EulerRun, IterationTrace, solve
from diamond_euler.field import MixedField, VectorField, make_grid
from diamond_euler.transport import TransportProblem, picard_solve


def _spectrum_field(grid, amp):
    s = grid.zeros()
    z = grid.family.nodes
    s[:] = amp(grid.xi)[:, None] * np.exp(-z)[None, :]
    return MixedField(grid, s)


def test_strip_fit_recovers_rate(grid32):
    fit = D.fit_strip(_spectrum_field(grid32, lambda x: np.exp(-0.7 * np.abs(x))), 0.5)
    assert fit.delta == pytest.approx(0.7, abs=1e-3)
    assert not fit.lower_bound
    assert fit.fit_window[0] == 4


def test_strip_fit_entire_spectrum_is_a_lower_bound(grid32):
    fit = D.fit_strip(_spectrum_field(grid32, lambda x: np.exp(-x ** 2)), 0.5)
    assert fit.lower_bound
    assert fit.delta > 0


def test_strip_fit_zero_field(grid):
    with pytest.raises(ResolutionError):
        D.fit_strip(MixedField(grid, grid.zeros()), 0.5)


def test_strip_fit_vector_field(grid32):
    w = from_formula({"kind": "pair", "spectrum": "strip", "delta": 0.5, "profile": "exp",
                      "profile_v": "exp"}, grid32)
    fit = D.fit_strip(w, 0.5)
    assert fit.delta == pytest.approx(0.5, abs=1e-2)


PAIRS = D.dyadic_pairs(0.5, 0.25, 4)


def test_dyadic_pairs():
    gaps = [b - a for a, b in PAIRS]
    assert gaps == pytest.approx([0.25 / 2 ** k for k in range(5)])


def test_cauchy_probe_pole_outside(grid):
    f = from_formula({"kind": "scalar", "spectrum": "mode", "k0": 0, "profile": "lorentz",
                      "pole": 0.5 + 0.35j}, grid)
    rep = D.probe_cauchy(f, PAIRS)
    assert rep.passed
    assert math.isfinite(rep.constants["c_cau"])
    assert len(rep.sweep) == len(PAIRS)


def test_cauchy_probe_entire_function_over_achieves(grid):
    rep = D.probe_cauchy(from_formula("scalar_packet", grid), PAIRS)
    ratios = [r["ratio"] for r in rep.sweep]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_cauchy_probe_zero(grid):
    rep = D.probe_cauchy(MixedField(grid, grid.zeros()), PAIRS)
    assert all(r["ratio"] == 0 and r["ratio_twice"] == 0 for r in rep.sweep)


def test_projection_probe(grid):
    grads = [from_formula("gradient_packet", grid), from_formula("potential", grid)]
    rep = D.probe_projection(grads, PAIRS)
    assert rep.constants["c_P"] < 1e-10
    u = from_formula("stream_mode", grid)
    v = from_formula("wave_packet", grid)
    rep = D.probe_projection([u, v], PAIRS, m=1, pairs=[(u, v), (v, v)])
    assert rep.passed
    bil = [r["ratio"] for r in rep.sweep if r["kind"] == "bilinear" and r["pair"] == 0]
    assert all(b <= 2 * a for a, b in zip(bil, bil[1:]))
    same = [r for r in rep.sweep if r["kind"] == "difference" and r["pair"] == 1][0]
    assert same["lhs"] == 0 and same["rhs_norm"] == 0


@given(st.floats(0.1, 100.0))
@settings(max_examples=5, deadline=None)
def test_probe_ratios_scale_invariant(scale):
    g = make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16)
    f = from_formula("scalar_packet", g)
    a = D.probe_cauchy(f, PAIRS[:3], m=1)
    b = D.probe_cauchy(f * scale, PAIRS[:3], m=1)
    for ra, rb in zip(a.sweep, b.sweep):
        assert abs(ra["ratio"] - rb["ratio"]) <= 1e-10 * max(ra["ratio"], 1.0)
    u, v = from_formula("stream_mode", g), from_formula("wave_packet", g)
    a = D.probe_projection([v], PAIRS[:2], pairs=[(u, v)])
    b = D.probe_projection([v * scale], PAIRS[:2], pairs=[(u * scale, v * scale)])
    for ra, rb in zip(a.sweep, b.sweep):
        assert abs(ra["ratio"] - rb["ratio"]) <= 1e-10 * max(ra["ratio"], 1.0)


def test_energy_boundary_steady_shear(grid):
    shear = from_formula("shear", grid).stack()
    states = np.stack([shear, shear])
    rep = D.probe_energy_boundary(grid, [0.0, 0.01], states, 0.4, 4.0)
    for r in rep.sweep:
        assert r["BT1"] == 0 and abs(r["BT2"]) < 1e-14


def test_energy_boundary_transport_run(grid):
    from test_transport import uniform
    drift = uniform(grid)
    sol = picard_solve(TransportProblem(drift, from_formula("wave_packet", grid), 0.0, 0.4, 4.0), 0.02, 4)
    rep = D.probe_energy_boundary(grid, sol.times, sol.states, 0.4, 4.0,
                                  drift=np.broadcast_to(drift.stack(), sol.states.shape))
    assert all(r["BT1"] == 0 for r in rep.sweep)
    assert rep.passed


def test_energy_boundary_euler_run(grid):
    run = EulerRun(from_formula("perturbed_shear", grid), theta0=0.4, beta=4.0, T=0.02, n_steps=4)
    sol, _ = solve(run)
    rep = D.probe_energy_boundary(grid, sol.times, sol.states, 0.4, 4.0)
    assert rep.passed
    assert all(math.isfinite(v) for v in rep.constants.values())


def test_energy_boundary_needs_snapshots(grid):
    with pytest.raises(DataError):
        D.probe_energy_boundary(grid, [], np.zeros((0, 2) + grid.shape), 0.4, 4.0)
    with pytest.raises(DataError):
        D.probe_energy_boundary(grid, [0.0, 0.1], np.zeros((1, 2) + grid.shape), 0.4, 4.0)


def test_empty_report_is_header_only(tmp_path):
    csv_path, json_path = D.emit_report(tmp_path)
    assert open(csv_path).read() == ",".join(D.CSV_COLUMNS) + "\n"
    doc = json.load(open(json_path))
    assert doc["probes"] == [] and doc["schema_version"] == 1


def test_steady_shear_report(grid, tmp_path):
    run = EulerRun(from_formula("shear", grid), theta0=0.4, beta=4.0, T=0.02, n_steps=4)
    sol, trace = solve(run)
    rows = D.time_rows(sol, 0.4, 4.0, 3)
    D.emit_report(tmp_path, rows, trace=trace)
    with open(tmp_path / "report.csv") as fh:
        got = list(csv.DictReader(fh))
    assert list(got[0]) == list(D.CSV_COLUMNS)
    deltas = {r["delta_fit"] for r in got}
    assert len(deltas) == 1
    assert [float(r["t"]) for r in got] == pytest.approx(list(run.times))


def test_trace_json_round_trip(tmp_path):
    from diamond_euler.euler import TraceRow
    tr = IterationTrace(rows=[TraceRow(0, 2.0, 1.0 / 3, 0.1, 0.2, 0.15, 0.05),
                              TraceRow(1, 3.0, 2.0 / 7, 1e-3, 2e-3, 1.5e-3, 5e-4, ratio=0.01)],
                        converged=True, iterations=2, config={"beta": 4.0})
    D.emit_report(tmp_path, trace=tr)
    doc = json.load(open(tmp_path / "report.json"))
    back = IterationTrace.from_json(json.dumps(doc["trace"]))
    assert back == tr


def test_contraction_scaling_slope():
    b = np.array([4.0, 8.0, 16.0])
    assert D.contraction_scaling(b, 0.3 * b ** -0.5) == pytest.approx(-0.5)
