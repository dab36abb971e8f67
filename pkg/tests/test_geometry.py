import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diamond_euler.errors import ParameterError
from diamond_euler.geometry import (CONOID, DIAMOND, Conoid, DecayProfile, DiamondDomain,
                                    build_path_family, contains, rho)

angles = st.floats(0.01, math.pi / 2 - 0.01)
points = st.complex_numbers(max_magnitude=4.0, allow_nan=False, allow_infinity=False)


def test_contains_examples():
    assert not contains(DiamondDomain(1.0), 0.2 + 1.0j)
    assert contains(DiamondDomain(1.4), 0.2 + 1.0j)
    for th in (0.1, 0.7, 1.4):
        assert not contains(DiamondDomain(th), 1j)
        assert not contains(Conoid(th), 1j)


@pytest.mark.parametrize("th", [0.0, -0.1, math.pi / 2, 2.0])
def test_angle_validation(th):
    with pytest.raises(ParameterError):
        DiamondDomain(th)
    with pytest.raises(ParameterError):
        Conoid(th)


@given(angles, points)
def test_diamond_membership_formula(th, z):
    x, y, t = z.real, abs(z.imag), math.tan(th)
    expect = (0 < x <= 1 and y < x * t) or (1 <= x < 1 + th and y < (1 + th - x) * t / th)
    assert contains(DiamondDomain(th), z) == expect


@given(angles, points)
def test_conoid_membership_formula(th, z):
    x, y, t = z.real, abs(z.imag), math.tan(th)
    expect = (0 < x <= 1 and y < x * t) or (x >= 1 and y < t)
    assert contains(Conoid(th), z) == expect


@given(angles, points)
def test_membership_symmetric_and_nested(th, z):
    d = DiamondDomain(th)
    assert contains(d, z) == contains(d, z.conjugate())
    # the diamond sits inside the conoid
    if contains(d, z):
        assert contains(Conoid(th), z)


def test_rho_examples():
    p = DecayProfile(0.6)
    assert rho(p, 0.5) == pytest.approx(0.3)
    assert rho(p, 1.3) == pytest.approx(0.15)
    assert rho(p, 1.6) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ParameterError):
        rho(p, 1.7)


@given(angles, st.floats(0, 3))
def test_rho_profiles(th, s):
    c = DecayProfile(th, CONOID)
    assert rho(c, s) == pytest.approx(th / 2)
    d = DecayProfile(th, DIAMOND)
    if s <= 1 + th:
        r = rho(d, s)
        assert 0 <= r <= th / 2 + 1e-15
        assert r == pytest.approx(th / 2 if s <= 1 else (1 + th - s) / 2, abs=1e-14)


def test_rho_continuous_at_corner():
    p = DecayProfile(0.45)
    assert rho(p, 1 - 1e-12) == pytest.approx(rho(p, 1 + 1e-12), abs=1e-11)


def test_family_endpoint_and_arclength():
    fam = build_path_family(theta_max=0.6, J=1, nodes_per_segment=32, tail_nodes=64)
    top = fam.paths[-1]
    seg0 = top.panel_b[top.segment == 0][-1]
    assert seg0 == pytest.approx(1 + 1j * math.tan(0.6), abs=1e-14)
    assert abs(seg0.imag - 0.6841) < 1e-4
    w0 = top.abs_weights[top.node_segment == 0].sum()
    assert w0 == pytest.approx(1 / math.cos(0.6), rel=1e-12)
    fam45 = build_path_family(theta_max=math.pi / 4, J=1, nodes_per_segment=32, tail_nodes=64)
    p45 = fam45.paths[-1]
    assert p45.abs_weights[p45.node_segment == 0].sum() == pytest.approx(math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("kind", [DIAMOND, CONOID])
def test_nodes_lie_on_their_contour(kind):
    fam = build_path_family(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=64, kind=kind)
    for pth in fam.paths:
        th, t = pth.theta, math.tan(pth.theta)
        z = pth.nodes
        seg = pth.node_segment
        s0 = z[seg == 0]
        assert np.allclose(s0.imag, s0.real * t, atol=1e-14)
        s1 = z[seg == 1]
        if kind == DIAMOND and th > 0:
            assert np.allclose(s1.imag, (1 + th - s1.real) * t / th, atol=1e-13)
        elif kind == CONOID:
            assert np.allclose(s1.imag, t, atol=1e-14)
        # arclength per segment
        for sid in np.unique(seg):
            a = pth.panel_a[pth.segment == sid][0]
            b = pth.panel_b[pth.segment == sid][-1]
            assert pth.abs_weights[seg == sid].sum() == pytest.approx(abs(b - a), rel=1e-12)


def test_real_path_is_the_grid():
    fam = build_path_family(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=64)
    real = fam.real_path
    assert real.theta == 0
    assert np.all(real.nodes.imag == 0)
    assert real.abs_weights.sum() == pytest.approx(fam.Y_max, rel=1e-12)
    assert fam.path_index(0.0) == 0
    with pytest.raises(ParameterError):
        fam.path_index(0.3333)


def test_family_angles_and_signature():
    fam = build_path_family(theta_max=0.6, J=3, nodes_per_segment=32, tail_nodes=64)
    assert np.allclose(fam.angles, [0, 0.2, 0.4, 0.6])
    assert fam.signature() == build_path_family(0.6, 3, 32, 8.0, DIAMOND, 64).signature()
