"""Analytic (diamond and conoid), Sobolev, time-weighted and combined norms.

Conventions: a field column holds Fourier-series coefficients c_k(y); the
continuous transform is approximated by ``L_x * c_k`` and the integral over
xi by a sum with spacing ``2 pi / L_x``.  With these conventions

    |f|_theta^2 = max_{theta' <= theta}  int_{Gamma(theta')} |dy| sum_k dxi
                  exp(2 rho_theta(Re y) |xi_k|) |L_x c_k(y)|^2

and the Sobolev part uses Parseval, ``int |f|^2 dx = L_x sum_k |c_k|^2``.
"""
from dataclasses import asdict, dataclass, field
import json
import math

import numpy as np

from .errors import ParameterError, ResolutionError
from .field import MixedField, VectorField, ddx_a, ddy_a
from .geometry import CONOID, DIAMOND
from .quadrature import gauss_legendre, lagrange_matrix

SCHEMA_VERSION = 1


@dataclass
class NormReport:
    theta: float
    m: int
    kind: str = DIAMOND
    d_norm_by_order: dict = field(default_factory=dict)
    d_norm_m: float = 0.0
    c_norm_m: float = None
    sobolev_m_a: float = None
    a: float = None
    per_angle: dict = field(default_factory=dict)
    sup_angle: dict = field(default_factory=dict)
    angles: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        d.pop("schema_version", None)
        return cls(**d)


@dataclass(frozen=True)
class TimeWeightedConfig:
    theta0: float
    beta: float
    gamma: float = 0.5
    T_stop: float = None

    def __post_init__(self):
        if not (0 < self.gamma < 1):
            raise ParameterError(f"gamma={self.gamma} outside (0, 1)")
        if not self.beta > 0:
            raise ParameterError(f"beta={self.beta} must be positive")
        if not (0 < self.theta0 < math.pi / 2):
            raise ParameterError(f"theta0={self.theta0} outside (0, pi/2)")
        if self.T_stop is not None and not self.T_stop < self.theta0 / self.beta:
            raise ParameterError("T_stop must be below theta0 / beta")


def multi_indices(m):
    return [(i, j) for j in range(m + 1) for i in range(m + 1 - j)]


def derivative_stack(grid, arr, m):
    """Array of d_x^i d_y^j arr for every i + j <= m, ordered as multi_indices(m)."""
    ys = [arr]
    for _ in range(m):
        ys.append(ddy_a(grid, ys[-1]))
    out = []
    for i, j in multi_indices(m):
        a = ys[j]
        if i:
            a = a * ((1j * grid.xi) ** i)[:, None]
        out.append(a)
    return np.stack(out)


def _folded_power(grid, arr):
    """|L_x c_k|^2 summed over +-k, shape (..., K + 1, n_nodes), times dxi."""
    K = grid.K
    pw = np.abs(arr) ** 2
    fold = pw[..., K:, :].copy()
    fold[..., 1:, :] += pw[..., K - 1::-1, :]
    return fold * (grid.L_x ** 2 * grid.dxi)


def _path_tables(grid, kind):
    key = ("norm_paths", kind)
    if key not in grid.cache:
        fam = grid.family
        if (kind == CONOID) != (fam.kind == CONOID):
            raise ParameterError(f"{kind} norms need a {kind} path family, got {fam.kind}")
        tabs = []
        for pth in fam.paths:
            mask = pth.norm_mask(fam.kind)
            idx = np.arange(pth.offset, pth.offset + pth.n_nodes)[mask]
            tabs.append((pth.theta, idx, pth.nodes.real[mask], pth.abs_weights[mask]))
        grid.cache[key] = tabs
    return grid.cache[key]


def _rho_values(theta, s, kind):
    if kind == CONOID:
        return np.full_like(s, theta / 2)
    return np.clip(np.minimum(theta, 1.0 + theta - s), 0.0, None) / 2


def path_integrals(grid, arr, thetas, kind=DIAMOND):
    """Per-angle weighted integrals.

    Returns ``I`` with shape ``arr.shape[:-2] + (len(thetas), J + 1)``;
    entries for paths steeper than the requested angle are NaN.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    tabs = _path_tables(grid, kind)
    lam = np.abs(grid.xi[grid.K:])
    P = _folded_power(grid, arr)
    out = np.full(arr.shape[:-2] + (thetas.size, len(tabs)), np.nan)
    for j, (th_j, idx, s, w) in enumerate(tabs):
        sel = np.nonzero(th_j <= thetas + 1e-12)[0]
        if sel.size == 0:
            continue
        rho = _rho_values(thetas[sel][:, None], s[None, :], kind)
        expo = 2 * rho[:, None, :] * lam[None, :, None]
        if expo.max() > 700:
            raise ResolutionError("exponential weight overflow: rho*|xi| too large")
        Wt = np.exp(expo) * w[None, None, :]
        out[..., sel, j] = np.einsum("tkn,...kn->...t", Wt, P[..., idx])
    if not np.all(np.isfinite(out[~np.isnan(out)])):
        raise ResolutionError("non-finite analytic norm")
    return out


def analytic_norms(grid, arr, thetas, m, kind=DIAMOND):
    """|arr|_{m,theta} for every theta; shape arr.shape[:-2] + (len(thetas),)."""
    D = derivative_stack(grid, arr, m)
    I = path_integrals(grid, D, thetas, kind)
    per = np.sqrt(np.nanmax(I, axis=-1))
    return per.sum(axis=0)


def _check_theta(grid, theta, kind):
    fam = grid.family
    if (kind == CONOID) != (fam.kind == CONOID):
        raise ParameterError(f"{kind} norms need a {kind} path family, got {fam.kind}")
    if not (0 <= theta <= fam.theta_max + 1e-12):
        raise ParameterError(f"theta={theta} outside the path family range [0, {fam.theta_max}]")


def _report(f, theta, m, kind):
    _check_theta(f.grid, theta, kind)
    D = derivative_stack(f.grid, f.samples, m)
    I = path_integrals(f.grid, D, [theta], kind)[:, 0, :]
    angles = f.family.angles
    rep = NormReport(theta=float(theta), m=int(m), kind=kind, angles=angles.tolist())
    total = 0.0
    for (i, j), row in zip(multi_indices(m), I):
        key = f"{i},{j}"
        val = float(np.sqrt(np.nanmax(row)))
        rep.d_norm_by_order[key] = val
        rep.per_angle[key] = [None if np.isnan(x) else float(x) for x in row]
        rep.sup_angle[key] = float(angles[int(np.nanargmax(row))])
        total += val
    if not f.resolved:
        rep.warnings.append("under-resolved")
    return rep, total


def d_norm(f, theta, m=0):
    rep, total = _report(f, theta, m, DIAMOND)
    rep.d_norm_m = total
    return rep


def c_norm(f, theta, m=0):
    rep, total = _report(f, theta, m, CONOID)
    rep.c_norm_m = total
    rep.d_norm_m = total
    return rep


def _tail_rule(grid, a):
    """Matrix and weights integrating over [a, Y_max] on the real path."""
    key = ("sobolev_rule", float(a))
    if key not in grid.cache:
        pth = grid.family.real_path
        p = pth.p
        A, B = pth.panel_a.real, pth.panel_b.real
        k = int(np.searchsorted(B, a, side="right"))
        k = min(k, A.size - 1)
        s, w = gauss_legendre(p)
        # partial panel [a, B[k]] resampled, full panels after it taken as they are
        lo, hi = a, B[k]
        t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * s
        ref = (2 * t - A[k] - B[k]) / (B[k] - A[k])
        L = lagrange_matrix(p, ref)
        cols = np.arange(k * p, (k + 1) * p) + pth.offset
        rest = np.arange((k + 1) * p, pth.n_nodes) + pth.offset
        w_part = 0.5 * (hi - lo) * w
        grid.cache[key] = (L, cols, rest, w_part, pth.abs_weights[rest - pth.offset])
    return grid.cache[key]


def sobolev_integrals(grid, arr, a=0.5):
    """int_a^Ymax int |f|^2 dx dy for arrays of shape (..., n_modes, n_nodes)."""
    if not (0 < a <= 1):
        raise ParameterError(f"a={a} outside (0, 1]")
    L, cols, rest, w_part, w_rest = _tail_rule(grid, a)
    part = np.einsum("ij,...kj->...ki", L, arr[..., cols])
    tot = (np.abs(part) ** 2 * w_part).sum(axis=(-1, -2))
    tot = tot + (np.abs(arr[..., rest]) ** 2 * w_rest).sum(axis=(-1, -2))
    return tot * grid.L_x


def sobolev_norms(grid, arr, m, a=0.5):
    D = derivative_stack(grid, arr, m)
    return np.sqrt(sobolev_integrals(grid, D, a)).sum(axis=0)


def sobolev_norm(f, a=0.5, m=0):
    return float(sobolev_norms(f.grid, f.samples, m, a))


def _components(f):
    if isinstance(f, VectorField):
        return f.components
    if isinstance(f, MixedField):
        return (f,)
    raise ParameterError("expected a MixedField or VectorField")


def combined_norm(f, theta, m=0, a=0.5, kind=DIAMOND):
    """Analytic norm plus Sobolev norm, summed over components."""
    tot = 0.0
    for c in _components(f):
        rep = d_norm(c, theta, m) if kind == DIAMOND else c_norm(c, theta, m)
        tot += rep.d_norm_m + sobolev_norm(c, a, m)
    return tot


# ------------------------------------------------------------- time weighted

class NormHistory:
    """Lazily evaluated table of |f(t_i)|_{m, theta} for a stored evolution.

    ``states`` has shape (nt, n_modes, n_nodes) or (nt, ncomp, n_modes, n_nodes);
    components are summed.
    """

    def __init__(self, grid, times, states, m, a=0.5, kind=DIAMOND):
        self.grid = grid
        self.times = np.asarray(times, dtype=float)
        st = np.asarray(states)
        if st.ndim == 3:
            st = st[:, None]
        if st.shape[0] != self.times.size:
            raise ParameterError("states and times disagree in length")
        self.states = st
        self.m, self.a, self.kind = int(m), a, kind
        self._memo = {}
        self._sob = None

    def values(self, thetas):
        """Array (nt, len(thetas)) of analytic norms."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        need = [th for th in np.unique(thetas) if float(th) not in self._memo]
        if need:
            vals = analytic_norms(self.grid, self.states, need, self.m, self.kind).sum(axis=1)
            for c, th in enumerate(need):
                self._memo[float(th)] = vals[:, c]
        return np.stack([self._memo[float(th)] for th in thetas], axis=1)

    def sobolev(self):
        if self._sob is None:
            self._sob = sobolev_norms(self.grid, self.states, self.m, self.a).sum(axis=1)
        return self._sob


def _weights(times, thetas, cfg):
    t = times[:, None]
    gap = cfg.theta0 - thetas[None, :]
    ok = (cfg.beta * t <= gap + 1e-14) & (gap >= -1e-14)
    if cfg.T_stop is not None:
        ok &= t <= cfg.T_stop + 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(gap > 0, cfg.beta * t / np.where(gap > 0, gap, 1.0), 0.0)
    base = np.clip(1.0 - frac, 0.0, 1.0)
    return ok, base ** cfg.gamma


def weighted_gamma_norm(history, cfg, thetas=None):
    """max over the admissible (t, theta') grid of (1 - beta t/(theta0 - theta'))^gamma |f(t)|_theta'.

    ``history`` is a NormHistory, or a tuple ``(times, thetas, table)`` of
    precomputed norm values with ``table[i, j] = |f(t_i)|_{thetas[j]}``.
    """
    if isinstance(history, NormHistory):
        times = history.times
        if thetas is None:
            thetas = admissible_thetas(history.grid, times, cfg)
        thetas = np.asarray(thetas, dtype=float)
        ok, wt = _weights(times, thetas, cfg)
        table = np.zeros(ok.shape)
        cols = np.nonzero(ok.any(axis=0))[0]
        if cols.size:
            table[:, cols] = history.values(thetas[cols])
    else:
        times, thetas, table = (np.asarray(x, dtype=float) for x in history)
        ok, wt = _weights(times, thetas, cfg)
    if not ok.any():
        raise ParameterError("empty admissible (t, theta) grid")
    return float(np.max(np.where(ok, wt * table, -np.inf)))


def admissible_thetas(grid, times, cfg, extra_rates=()):
    """Family angles below theta0 plus theta0 - rate * t for the given rates."""
    th = [x for x in grid.family.angles if x <= cfg.theta0 + 1e-12]
    th.append(cfg.theta0)
    for r in (cfg.beta,) + tuple(extra_rates):
        th.extend(cfg.theta0 - r * np.asarray(times))
    th = np.array(th)
    return np.unique(np.round(th[th >= 0], 15))


def time_analytic_norm(history, theta0, rate, T_stop=None):
    """sup_t |f(t)|_{m, theta0 - rate t}  over the stored times."""
    t = history.times
    sel = theta0 - rate * t >= -1e-14
    if T_stop is not None:
        sel &= t <= T_stop + 1e-14
    idx = np.nonzero(sel)[0]
    if idx.size == 0:
        return 0.0
    th = np.clip(theta0 - rate * t[idx], 0.0, None)
    vals = history.values(th)
    return float(np.max(vals[idx, np.arange(idx.size)]))


def combined_weighted_norm(history, cfg):
    """Weighted-gamma analytic norm plus the sup in time of the Sobolev norm."""
    sob = history.sobolev()
    if cfg.T_stop is not None:
        sob = sob[history.times <= cfg.T_stop + 1e-14]
    return weighted_gamma_norm(history, cfg) + float(np.max(sob))


def asano_check(history, cfg, beta_prime):
    """The chain  |f|^(g)_{b'} <= |f|^D_{b'} <= (1 - b/b')^(-g) |f|^(g)_b  with b < b'.

    Returns ``(left, middle, right, holds)``.
    """
    if not cfg.beta < beta_prime:
        raise ParameterError("asano_check needs beta < beta_prime")
    cfg2 = TimeWeightedConfig(cfg.theta0, beta_prime, cfg.gamma, cfg.T_stop)
    thetas = admissible_thetas(history.grid, history.times, cfg, (beta_prime,))
    left = weighted_gamma_norm(history, cfg2, thetas)
    middle = time_analytic_norm(history, cfg.theta0, beta_prime, cfg.T_stop)
    factor = asano_factor(cfg.beta, beta_prime, cfg.gamma)
    right = factor * weighted_gamma_norm(history, cfg, thetas)
    slack = 1e-12 * max(abs(right), 1e-300)
    return left, middle, right, bool(left <= middle + slack and middle <= right + slack)


def asano_factor(beta, beta_prime, gamma):
    return (1.0 - beta / beta_prime) ** (-gamma)
