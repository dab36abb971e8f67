"""Closed-form data sampled exactly at every contour node.

A datum is described by a plain dict, for example::

    {"name": "stream_mode", "profile": "yexp", "k0": 1, "amplitude": 1.0}

Vector data are built from a streamfunction (divergence free, wall
compatible when the profile vanishes at 0), from a potential (a gradient),
or from an explicit shear.  Profiles are real-analytic functions of y given
with their first derivative and their complex poles.
"""
import math

import numpy as np

from .errors import DomainViolationError, ParameterError
from .field import MixedField, SpectralGrid, VectorField
from .geometry import CONOID, Conoid, DiamondDomain, contains


def _bump(z, center, width):
    s = (np.real(z) - center) / width
    inside = (np.abs(s) < 1) & (np.abs(np.imag(z)) == 0)
    ss = np.where(inside, s, 0.0)
    q = 1.0 - ss ** 2
    val = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
    der = np.where(inside, val * (-2.0 * ss / q ** 2) / width, 0.0)
    return val.astype(complex), der.astype(complex)


def _profile(name, params):
    """Return (g, g', poles) for a named profile."""
    if name == "yexp":
        return (lambda z: z * np.exp(-z), lambda z: (1 - z) * np.exp(-z), [])
    if name == "ygauss":
        return (lambda z: z * np.exp(-z * z), lambda z: (1 - 2 * z * z) * np.exp(-z * z), [])
    if name == "rational":
        return (lambda z: z / (1 + z * z) ** 2, lambda z: (1 - 3 * z * z) / (1 + z * z) ** 3,
                [1j, -1j])
    if name == "exp":
        return (lambda z: np.exp(-z), lambda z: -np.exp(-z), [])
    if name == "gauss":
        return (lambda z: np.exp(-z * z), lambda z: -2 * z * np.exp(-z * z), [])
    if name == "one":
        return (lambda z: np.ones_like(z), lambda z: np.zeros_like(z), [])
    if name == "lorentz":
        # |p|^2 / ((y - p)(y - conj p)), equal to 1 / (1 + (y/l)^2) for p = i l
        p = complex(params.get("pole", 1j))
        q = abs(p) ** 2
        return (lambda z: q / ((z - p) * (z - p.conjugate())),
                lambda z: -q * (2 * z - 2 * p.real) / ((z - p) * (z - p.conjugate())) ** 2,
                [p, p.conjugate()])
    if name == "bump":
        c, w = float(params["center"]), float(params["width"])
        return (lambda z: _bump(z, c, w)[0], lambda z: _bump(z, c, w)[1], [])
    raise ParameterError(f"unknown profile {name!r}")


def _spectrum(grid, params):
    """Complex coefficients c_k over modes -K..K with c_{-k} = conj(c_k)."""
    kind = params.get("spectrum", "mode")
    A = complex(params.get("amplitude", 1.0))
    xi = grid.xi
    c = np.zeros(grid.n_modes, dtype=complex)
    if kind == "mode":
        k0 = int(params.get("k0", 1))
        if abs(k0) > grid.K:
            raise ParameterError(f"mode {k0} not resolved with K={grid.K}")
        c[grid.K + k0] = A
        if k0 != 0:
            c[grid.K - k0] = A.conjugate()
        else:
            c[grid.K] = A.real
    elif kind == "packet":
        sig = float(params.get("sigma", 1.0))
        c[:] = A.real * sig * math.sqrt(math.pi) / grid.L_x * np.exp(-(sig * xi) ** 2 / 4)
    elif kind == "strip":
        d = float(params.get("delta", 0.7))
        c[:] = A.real * np.exp(-d * np.abs(xi))
        if not params.get("keep_mean", True):
            c[grid.K] = 0
    elif kind == "random":
        # Gaussian coefficients under an e^{-delta |xi|} envelope, Hermitian by construction
        rng = np.random.default_rng(int(params.get("seed", 0)))
        d = float(params.get("delta", 1.0))
        half = rng.standard_normal(grid.K) + 1j * rng.standard_normal(grid.K)
        c[grid.K + 1:] = half
        c[:grid.K] = np.conj(half[::-1])
        c[grid.K] = rng.standard_normal()
        c *= A.real * np.exp(-d * np.abs(xi))
    else:
        raise ParameterError(f"unknown spectrum {kind!r}")
    return c


PRESETS = {
    "zero": {"kind": "zero"},
    "shear": {"kind": "shear", "profile": "lorentz", "pole": 1j},
    "stream_mode": {"kind": "stream", "spectrum": "mode", "profile": "yexp", "k0": 1},
    "wave_packet": {"kind": "stream", "spectrum": "packet", "profile": "yexp"},
    "gradient_mode": {"kind": "harmonic", "spectrum": "mode", "k0": 1},
    "gradient_packet": {"kind": "harmonic", "spectrum": "packet"},
    "potential": {"kind": "potential", "spectrum": "packet", "profile": "gauss"},
    "generic": {"kind": "pair", "spectrum": "packet", "profile": "gauss", "profile_v": "exp"},
    "bump": {"kind": "stream", "spectrum": "mode", "profile": "bump", "k0": 1},
    "perturbed_shear": {"kind": "shear+stream", "profile": "lorentz", "pole": 1j,
                        "stream_profile": "ygauss", "k0": 1, "perturbation": 1e-2},
    "random_stream": {"kind": "stream", "spectrum": "random", "profile": "yexp", "delta": 1.0,
                      "seed": 0},
    "scalar_zero": {"kind": "scalar_zero"},
    "scalar_mode": {"kind": "scalar", "spectrum": "mode", "profile": "exp", "k0": 1},
    "scalar_packet": {"kind": "scalar", "spectrum": "packet", "profile": "exp"},
    "scalar_strip": {"kind": "scalar", "spectrum": "strip", "profile": "exp", "delta": 0.7},
    "scalar_shear": {"kind": "scalar", "spectrum": "mode", "k0": 0, "profile": "lorentz",
                     "pole": 1j},
    "scalar_ramp": {"kind": "ramp"},
}


def resolve(spec):
    """Merge a datum descriptor with its preset defaults."""
    if isinstance(spec, str):
        spec = {"name": spec}
    spec = dict(spec)
    name = spec.get("name")
    if name is not None:
        if name not in PRESETS:
            raise ParameterError(f"unknown catalog entry {name!r}")
        merged = dict(PRESETS[name])
        merged.update(spec)
        spec = merged
    if "kind" not in spec:
        raise ParameterError("datum descriptor needs a name or a kind")
    return spec


def _check_poles(poles, family):
    th = family.theta_max
    dom = Conoid(th) if family.kind == CONOID else DiamondDomain(th)
    for p in poles:
        if contains(dom, complex(p), closed=True):
            raise DomainViolationError(f"pole {p} lies in the closed {family.kind} of angle {th}")


def _ramp_columns(grid, z, params):
    # x-decay rate that degrades away from the wall: |f(xi, y)| ~ exp(-|xi| w0 / (1 + y)^2)
    w0 = float(params.get("w0", 2.0))
    A = float(params.get("amplitude", 1.0))
    lam = np.abs(grid.xi)[:, None]
    w = w0 / (1.0 + z) ** 2
    h = 1.0 / (1.0 + z) ** 2
    return A * np.exp(-lam * w[None, :]) * h[None, :], [-1.0]


def from_formula(spec, grid, K=None, L_x=2 * math.pi):
    """Sample a catalog datum on every node of ``grid``.

    ``grid`` is a SpectralGrid, or a path family together with ``K``.
    Returns a VectorField, or a MixedField for scalar entries.
    """
    if not isinstance(grid, SpectralGrid):
        if K is None:
            raise ParameterError("K is required when passing a path family")
        grid = SpectralGrid(grid, K, L_x)
    spec = resolve(spec)
    kind = spec["kind"]
    z = grid.family.nodes
    xi = grid.xi[:, None]
    if kind == "zero":
        return VectorField.zeros(grid)
    if kind == "scalar_zero":
        return MixedField(grid, grid.zeros())
    if kind == "ramp":
        cols, poles = _ramp_columns(grid, z, spec)
        _check_poles(poles, grid.family)
        return MixedField(grid, cols)
    if kind in ("shear", "shear+stream"):
        g, _, poles = _profile(spec.get("profile", "lorentz"), spec)
        _check_poles(poles, grid.family)
        u = grid.zeros()
        u[grid.K] = float(spec.get("amplitude", 1.0)) * g(z)
        w = VectorField(MixedField(grid, u), MixedField(grid, grid.zeros()))
        if kind == "shear":
            return w
        pert = {"kind": "stream", "spectrum": "mode", "k0": spec.get("k0", 1),
                "profile": spec.get("stream_profile", "ygauss"),
                "amplitude": spec.get("perturbation", 1e-2)}
        return w + from_formula(pert, grid)
    if kind == "harmonic":
        c = _spectrum(grid, spec)[:, None]
        phi = c * np.exp(-np.abs(xi) * z[None, :])
        return VectorField(MixedField(grid, 1j * xi * phi), MixedField(grid, -np.abs(xi) * phi))
    if spec.get("profile") == "bump":
        spec.setdefault("center", 2.5 + grid.family.theta_max)
        spec.setdefault("width", 1.2)
    g, dg, poles = _profile(spec.get("profile", "exp"), spec)
    _check_poles(poles, grid.family)
    c = _spectrum(grid, spec)[:, None]
    gz, dgz = g(z)[None, :], dg(z)[None, :]
    if kind == "scalar":
        return MixedField(grid, c * gz)
    if kind == "stream":
        return VectorField(MixedField(grid, c * dgz), MixedField(grid, -1j * xi * c * gz))
    if kind == "potential":
        return VectorField(MixedField(grid, 1j * xi * c * gz), MixedField(grid, c * dgz))
    if kind == "pair":
        h, _, poles_v = _profile(spec.get("profile_v", "exp"), spec)
        _check_poles(poles_v, grid.family)
        return VectorField(MixedField(grid, c * gz), MixedField(grid, c * h(z)[None, :]))
    raise ParameterError(f"unknown datum kind {kind!r}")
