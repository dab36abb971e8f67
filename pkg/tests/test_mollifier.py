import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from diamond_euler.errors import DomainViolationError, ParameterError
from diamond_euler.field import MixedField, VectorField
from diamond_euler.mollifier import (A_NORM, MollifierKernel, get_plan, kernel_eval, mollify)
from diamond_euler.norms import sobolev_norm


def test_kernel_values():
    assert kernel_eval(0.0) == pytest.approx(2 / math.pi, rel=1e-15)
    assert kernel_eval(1.0) == pytest.approx(A_NORM / 4, rel=1e-15)
    big = np.array([1e3, 1e4])
    assert np.allclose(kernel_eval(big) * big ** 4, A_NORM, rtol=1e-5)
    with pytest.raises(DomainViolationError):
        kernel_eval(1j)
    with pytest.raises(ParameterError):
        MollifierKernel(0.0)


def test_unit_mass():
    k = MollifierKernel()
    assert k.antiderivative(1e150) - k.antiderivative(-1e150) == pytest.approx(1.0, abs=1e-12)
    val = quad(lambda y: kernel_eval(y), -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    assert val == pytest.approx(1.0, abs=1e-10)
    for eps in (0.05, 0.5):
        val = quad(lambda y: kernel_eval(y, eps), -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13,
                   points=None)[0]
        assert val == pytest.approx(1.0, abs=1e-9)


@given(st.floats(-50, 50))
def test_kernel_real_on_real_axis(y):
    v = kernel_eval(np.complex128(y))
    assert abs(v.imag) <= 1e-15 * abs(v.real)


@pytest.mark.parametrize("theta", [0.3, 0.7, 1.2, 1.5])
def test_sector_bound(theta):
    # |1 + y^2| >= cos(phi) (1 + |y|^2) on the ray arg y = phi, hence the constant
    C = A_NORM / math.cos(theta) ** 2
    r = np.geomspace(1e-3, 1e3, 2001)
    for phi in np.linspace(-theta, theta, 41) * (1 - 1e-9):
        y = r * np.exp(1j * phi)
        assert np.all(np.abs(kernel_eval(y)) * (1 + r ** 2) <= C * (1 + 1e-12))


def _mass_oracle(y, eps, Y):
    """Kernel mass on [-Y, Y] plus the mass against the continuation of 1 past Y."""
    F = MollifierKernel.antiderivative
    kept = F((Y - y) / eps) - F((-Y - y) / eps)
    cont = [quad(lambda s: kernel_eval(yi - Y - s, eps) * (1 + s + s * s / 2) * np.exp(-s),
                 0, np.inf, points=None, epsabs=1e-14, epsrel=1e-13, limit=500)[0]
            if Y - yi > 2 else
            sum(quad(lambda s: kernel_eval(yi - Y - s, eps) * (1 + s + s * s / 2) * np.exp(-s),
                     lo, hi, epsabs=1e-15, epsrel=1e-13, limit=500)[0]
                for lo, hi in ((0, eps), (eps, 1), (1, 60)))
            for yi in y]
    return kept, np.array(cont)


def test_plan_mass_matches_kernel_mass(grid):
    eps = 0.1
    plan = get_plan(grid, eps, 3)
    real = grid.family.real_path
    y = real.nodes.real[::7]
    kept, cont = _mass_oracle(y, eps, grid.family.Y_max)
    assert np.abs(plan.mass()[real.slice][::7] - (kept + cont)).max() < 1e-10


def test_mollify_zero_and_constant(grid):
    assert np.all(mollify(MixedField(grid, grid.zeros()), 0.1).samples == 0)
    s = grid.zeros()
    s[grid.K] = 1.0
    eps = 0.1
    out = mollify(MixedField(grid, s), eps).samples[grid.K]
    real = grid.family.real_path
    y = real.nodes.real
    Y = grid.family.Y_max
    kept, cont = _mass_oracle(y, eps, Y)
    # the continuation past Y differs from 1 by at most 1, so the loss is bounded
    # by the kernel mass beyond both ends
    tail_bound = 2 * A_NORM / 3 * ((eps / (Y + y)) ** 3 + (eps / (Y - y)) ** 3)
    inner = y < Y - 1
    assert np.all(np.abs(out[real.slice] - 1)[inner] <= tail_bound[inner] + 1e-9)
    assert np.abs(out[real.slice] - (kept + cont)).max() < 1e-10


def test_mollify_vector_field(grid):
    from diamond_euler.catalog import from_formula
    w = from_formula("wave_packet", grid)
    out = mollify(w, 0.1)
    assert isinstance(out, VectorField)
    assert np.allclose(out.u.samples, mollify(w.u, 0.1).samples)


def test_convergence_single_gauss_mode(grid):
    z = grid.family.nodes
    s = grid.zeros()
    s[grid.K + 1] = np.exp(-z ** 2)
    s[grid.K - 1] = np.exp(-z ** 2)
    f = MixedField(grid, s)
    errs = [sobolev_norm(mollify(f, e, 3) - f, 0.5, 2) for e in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.0
