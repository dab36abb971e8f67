"""Half-plane Leray projector built from exponential kernel integrals.

For each Fourier mode with lam = |xi| > 0 and R = i xi / lam,

    P_t w = u - lam/2 [ Dec(u + R v) + Ref(u - R v) + (1 + e^{-2 lam y}) Grow(u - R v) ]
    P_n w =     lam/2 [ Dec(v - R u) - Ref(v + R u) + (1 - e^{-2 lam y}) Grow(v + R u) ]

with
    Dec(f)(y)  = int_0^y     e^{-lam (y - y')} f(y') dy'
    Ref(f)(y)  = int_0^y     e^{-lam (y + y')} f(y') dy'
    Grow(f)(y) = int_y^inf   e^{ lam (y - y')} f(y') dy'.

The xi = 0 column is left unchanged in u and set to zero in v.

At a node of contour Gamma(theta_j) every integral is taken along that
same contour (and its real continuation), which is legitimate because the
integrands are analytic in the diamond.  Along a contour Re y increases,
so every exponential factor used below has modulus at most one.  The
integrals are product rules: exact exponential moments of the per-panel
interpolating polynomial.  Beyond the end of a contour the integrand is
replaced by an envelope (c0 + c1 s) e^{-sigma s} matched to the value and
two derivatives at the end point.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PreconditionError
from .field import (MixedField, VectorField, ddx_a, ddy_a, from_physical_a,
                    panel_derivatives_at_end_a, to_physical_a)
from .quadrature import decay_moments

KINDS = ("grow", "decay", "reflect")


@dataclass(eq=False)
class _PathPlan:
    L: np.ndarray       # (K+1, P, p, p) decay moments, scaled by h
    E: np.ndarray       # (K+1, P, p) full-panel decay moments, scaled by h
    M: np.ndarray       # (K+1, P, p, p) moments of exp(-lam (y' - a_m)), scaled by h
    prop_in: np.ndarray   # (K+1, P, p) exp(-lam (z - a_m))
    prop_out: np.ndarray  # (K+1, P, p) exp(-lam (b_m - z))
    T_dec: np.ndarray   # (K+1, P, P) exp(-lam (a_m - b_n)), n < m
    T_grow: np.ndarray  # (K+1, P, P) exp(-lam (a_n - b_m)), n > m
    T_tail: np.ndarray  # (K+1, P) exp(-lam (end - b_m))
    T_ref: np.ndarray   # (K+1, P, P) exp(-lam (a_m + a_n)), n < m
    e2a: np.ndarray     # (K+1, P) exp(-2 lam a_m)
    e2: np.ndarray      # (K+1, N) exp(-2 lam z)
    slice: slice
    index: int


class KernelIntegralPlan:
    """Precomputed product-integration data for one SpectralGrid."""

    def __init__(self, grid):
        self.grid = grid
        fam = grid.family
        lam = np.abs(grid.xi[grid.K:])
        self.lam = lam
        self.paths = []
        for j, pth in enumerate(fam.paths):
            h = pth.half_lengths
            p = pth.p
            mu = lam[:, None] * h[None, :]
            L, E, M = decay_moments(mu.ravel(), p)
            L = L.reshape(lam.size, h.size, p, p) * h[None, :, None, None]
            M = M.reshape(lam.size, h.size, p, p) * h[None, :, None, None]
            E = E.reshape(lam.size, h.size, p) * h[None, :, None]
            z = pth.nodes.reshape(h.size, p)
            a, b = pth.panel_a, pth.panel_b
            lz = lam[:, None, None]
            prop_in = np.exp(-lz * (z - a[:, None])[None])
            prop_out = np.exp(-lz * (b[:, None] - z)[None])
            diff = a[:, None] - b[None, :]                 # a_m - b_n
            lower = np.tril(np.ones((h.size, h.size), bool), -1)
            T_dec = np.where(lower[None], np.exp(-lz * np.where(lower, diff, 0)[None]), 0)
            T_grow = np.where(lower.T[None], np.exp(-lz * np.where(lower.T, diff.T, 0)[None]), 0)
            T_tail = np.exp(-lam[:, None] * (pth.end - b)[None, :])
            asum = a[:, None] + a[None, :]
            T_ref = np.where(lower[None], np.exp(-lz * np.where(lower, asum, 0)[None]), 0)
            e2a = np.exp(-2 * lam[:, None] * a[None, :])
            e2 = np.exp(-2 * lam[:, None] * pth.nodes[None, :])
            self.paths.append(_PathPlan(L, E, M, prop_in, prop_out, T_dec, T_grow, T_tail,
                                        T_ref, e2a, e2, pth.slice, j))

    # -- folding between signed modes -K..K and |k| = 0..K
    def _fold(self, f):
        K = self.grid.K
        return np.stack([f[..., K:, :], f[..., K::-1, :]])

    def _unfold(self, r):
        K = self.grid.K
        out = np.empty(r.shape[1:-2] + (2 * K + 1, r.shape[-1]), dtype=complex)
        out[..., K:, :] = r[0]
        out[..., :K, :] = r[1][..., K:0:-1, :]
        return out

    def _decay_path(self, pp, f):
        fr = _panels(f, pp)
        local = _panel_matmul(pp.L, fr)
        c = (pp.E * fr).sum(-1)
        start = _transfer(pp.T_dec, c)
        return (local + pp.prop_in * start[..., None]).reshape(f.shape)

    def _reflect_path(self, pp, f):
        # int_0^y e^{-lam (y + y')} f = e^{-lam y} int_0^y e^{-lam y'} f, split at panel starts
        fr = _panels(f, pp)
        local = _panel_matmul(pp.M, fr)
        c = (pp.E[..., ::-1] * fr).sum(-1)
        start = _transfer(pp.T_ref, c)
        out = pp.prop_in * (start[..., None] + pp.e2a[..., None] * local)
        return out.reshape(f.shape)

    def _tail(self, pp, f):
        """Integral beyond the path end, with an uncertainty estimate."""
        lam = self.lam
        f0, f1, f2 = panel_derivatives_at_end_a(self.grid, f, pp.index, 2)
        with np.errstate(all="ignore"):
            s1 = -f1 / f0
            d2 = f1 * f1 - f0 * f2
            # a discriminant at round-off level means a pure exponential
            d2 = np.where(np.abs(d2) <= 1e-10 * np.abs(f0) ** 2 * (1 + np.abs(s1) ** 2), 0, d2)
            disc = np.sqrt(d2 + 0j)
            r_a, r_b = (-f1 + disc) / f0, (-f1 - disc) / f0
            s2 = np.where(r_a.real >= r_b.real, r_a, r_b)
            c1 = f1 + s2 * f0
            lamb = lam.reshape((1,) * (f0.ndim - 1) + (-1,))
            single = f0 / (lamb + np.where(s1.real > 0, s1, 0))
            two = f0 / (lamb + s2) + c1 / (lamb + s2) ** 2
            use_two = np.isfinite(two) & (s2.real > 0)
            tail = np.where(use_two, two, single)
            tail = np.where((f0 == 0) | (lamb == 0) | ~np.isfinite(tail), 0, tail)
            unc = np.where(use_two, np.abs(two - single), np.abs(single))
            unc = np.where(np.isfinite(unc), unc, 0)
        return tail, unc

    def _grow_path(self, pp, f):
        fr = _panels(f, pp)
        local = _panel_matmul(pp.L, fr[..., ::-1])[..., ::-1]
        c = (pp.E[..., ::-1] * fr).sum(-1)
        tail, unc = self._tail(pp, f)
        G = _transfer(pp.T_grow, c) + pp.T_tail * tail[..., None]
        out = (local + pp.prop_out * G[..., None]).reshape(f.shape)
        return out, unc

    def integrals(self, f, kind):
        """Kernel integrals (without the |xi| factor) of arrays (..., n_modes, n_nodes)."""
        F = self._fold(f)
        out = np.empty_like(F)
        unc = 0.0
        for pp in self.paths:
            seg = F[..., pp.slice]
            if kind == "decay":
                out[..., pp.slice] = self._decay_path(pp, seg)
            elif kind == "reflect":
                out[..., pp.slice] = self._reflect_path(pp, seg)
            elif kind == "grow":
                out[..., pp.slice], u = self._grow_path(pp, seg)
                unc = max(unc, float(np.max(u * self.lam)) if u.size else 0.0)
            else:
                raise ParameterError(f"unknown kernel kind {kind!r}")
        self.last_uncertainty = unc
        return self._unfold(out)

    def e2(self):
        """exp(-2 |xi| y) at every node, shape (n_modes, n_nodes)."""
        F = np.concatenate([pp.e2 for pp in self.paths], axis=-1)
        return self._unfold(np.stack([F, F]))


def _panels(f, pp):
    p = pp.L.shape[-1]
    return f.reshape(f.shape[:-1] + (-1, p))


def _panel_matmul(L, fr):
    """out[..., k, m, i] = sum_l L[k, m, i, l] fr[..., k, m, l] via batched matmul."""
    lead = fr.shape[:-3]
    B = int(np.prod(lead)) if lead else 1
    x = fr.reshape((B,) + fr.shape[-3:])
    x = np.moveaxis(x, 0, -1)                 # (k, m, l, B)
    y = np.matmul(L, x)                       # (k, m, i, B)
    return np.moveaxis(y, -1, 0).reshape(fr.shape)


def _transfer(T, c):
    """out[..., k, m] = sum_n T[k, m, n] c[..., k, n]."""
    lead = c.shape[:-2]
    B = int(np.prod(lead)) if lead else 1
    x = np.moveaxis(c.reshape((B,) + c.shape[-2:]), 0, -1)   # (k, n, B)
    y = np.matmul(T, x)
    return np.moveaxis(y, -1, 0).reshape(c.shape)


def get_plan(grid):
    if "kernel_plan" not in grid.cache:
        grid.cache["kernel_plan"] = KernelIntegralPlan(grid)
    return grid.cache["kernel_plan"]


def kernel_apply(kind, f, plan=None):
    """|xi| times the grow, decay or reflect integral of a scalar field."""
    if kind not in KINDS:
        raise ParameterError(f"unknown kernel kind {kind!r}")
    plan = plan or get_plan(f.grid)
    if plan.grid is not f.grid and not plan.grid.compatible(f.grid):
        raise ParameterError("plan and field grids differ")
    res = plan.integrals(f.samples, kind) * np.abs(f.grid.xi)[:, None]
    return MixedField(f.grid, res, f.warnings)


def project_a(grid, u, v, plan=None):
    """Leray projection of sample arrays; returns (P_t, P_n)."""
    plan = plan or get_plan(grid)
    lam = np.abs(grid.xi)[:, None]
    R = (1j * np.sign(grid.xi))[:, None]
    A, B = u + R * v, u - R * v
    C, Dd = v - R * u, v + R * u
    e2 = plan.e2()
    dec = plan.integrals(np.stack([A, C]), "decay")
    ref = plan.integrals(np.stack([B, Dd]), "reflect")
    gro = plan.integrals(np.stack([B, Dd]), "grow")
    Pt = u - 0.5 * lam * (dec[0] + ref[0] + (1 + e2) * gro[0])
    Pn = 0.5 * lam * (dec[1] - ref[1] + (1 - e2) * gro[1])
    return Pt, Pn


def project(w, plan=None):
    Pt, Pn = project_a(w.grid, w.u.samples, w.v.samples, plan)
    warn = w.u.warnings + w.v.warnings
    return VectorField(MixedField(w.grid, Pt, warn), MixedField(w.grid, Pn, warn))


def advection_a(grid, v, u, substitute=True):
    """(v . grad) u for stacked arrays v, u of shape (..., 2, n_modes, n_nodes).

    With ``substitute`` the term v2 d_y u2 uses d_y u2 = -d_x u1, valid for
    divergence-free u.
    """
    dxu = ddx_a(grid, u)
    dyu1 = ddy_a(grid, u[..., 0, :, :])
    dyu2 = -dxu[..., 0, :, :] if substitute else ddy_a(grid, u[..., 1, :, :])
    V = to_physical_a(grid, v)
    Dx = to_physical_a(grid, dxu)
    Dy = to_physical_a(grid, np.stack([dyu1, dyu2], axis=-3))
    prod = V[..., :1, :, :] * Dx + V[..., 1:, :, :] * Dy
    return from_physical_a(grid, prod)


def project_bilinear(v, u, tol=1e-6, check=True):
    """P((v . grad) u) for divergence-free, wall-compatible v and u."""
    if check:
        for name, w in (("v", v), ("u", u)):
            if w.divergence_residual() > tol:
                raise PreconditionError(f"{name} is not divergence free")
    adv = advection_a(v.grid, v.stack(), u.stack())
    Pt, Pn = project_a(v.grid, adv[0], adv[1])
    return VectorField(MixedField(v.grid, Pt), MixedField(v.grid, Pn))
