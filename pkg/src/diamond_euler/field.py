"""Fields stored as Fourier coefficients in x times samples in y.

A scalar field is kept as an array ``samples[k, n]`` holding the Fourier
series coefficient of mode ``xi_k = 2 pi k / L_x`` (k = -K..K) at node ``n``
of the attached path family.  All nodes of all contours live in one array;
the angle-zero contour doubles as the real-axis grid.

The functions ending in ``_a`` act on raw sample arrays of shape
``(..., n_modes, n_nodes)`` so that solvers can batch over time and
components.
"""
from dataclasses import dataclass, field
import functools
import math

import numpy as np
import scipy.fft

from .errors import ParameterError
from .quadrature import diff_matrix, gauss_legendre, lagrange_matrix

SPECTRAL_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Fourier modes in x combined with a contour family in y."""

    family: object
    K: int
    L_x: float = 2 * math.pi
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ParameterError(f"K={self.K} must be a positive integer")
        if not self.L_x > 0:
            raise ParameterError(f"L_x={self.L_x} must be positive")

    @property
    def modes(self):
        return np.arange(-self.K, self.K + 1)

    @property
    def xi(self):
        return 2 * math.pi * self.modes / self.L_x

    @property
    def dxi(self):
        return 2 * math.pi / self.L_x

    @property
    def n_modes(self):
        return 2 * self.K + 1

    @property
    def shape(self):
        return (self.n_modes, self.family.n_nodes)

    def signature(self):
        return (self.K, float(self.L_x)) + self.family.signature()

    def compatible(self, other):
        return self is other or self.signature() == other.signature()

    def zeros(self, lead=()):
        return np.zeros(tuple(lead) + self.shape, dtype=complex)


def make_grid(theta_max=0.6, J=8, nodes_per_segment=64, Y_max=8.0, K=64,
              L_x=2 * math.pi, kind="diamond", tail_nodes=192, panel_order=16):
    """Shared grid for a parameter set; equal parameters return the same object,
    so operator plans cached on the grid are reused."""
    return _make_grid(float(theta_max), int(J), int(nodes_per_segment), float(Y_max), int(K),
                      float(L_x), str(kind), int(tail_nodes), int(panel_order))


@functools.lru_cache(maxsize=16)
def _make_grid(theta_max, J, nodes_per_segment, Y_max, K, L_x, kind, tail_nodes, panel_order):
    from .geometry import build_path_family
    fam = build_path_family(theta_max, J, nodes_per_segment, Y_max, kind, tail_nodes, panel_order)
    return SpectralGrid(fam, K, L_x)


@dataclass(frozen=True, eq=False)
class MixedField:
    grid: SpectralGrid
    samples: np.ndarray
    warnings: tuple = ()

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != self.grid.shape:
            raise ParameterError(f"samples shape {s.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "samples", s)

    @property
    def family(self):
        return self.grid.family

    @property
    def xi(self):
        return self.grid.xi

    @property
    def real_samples(self):
        return self.samples[:, self.family.real_path.slice]

    def path_samples(self, j):
        return self.samples[:, self.family.paths[j].slice]

    def column(self, k):
        """Samples of Fourier mode k (an integer in -K..K)."""
        return self.samples[k + self.grid.K]

    def with_samples(self, samples, warnings=None):
        return MixedField(self.grid, samples, self.warnings if warnings is None else warnings)

    def is_real(self, rtol=1e-12):
        r = self.real_samples
        scale = max(np.abs(r).max(), 1e-300)
        return bool(np.abs(r - np.conj(r[::-1])).max() <= rtol * scale)

    @property
    def resolved(self):
        top = np.abs(self.samples[[0, -1]]).max()
        return bool(top <= SPECTRAL_FLOOR * max(np.abs(self.samples).max(), 1e-300))

    def _other(self, g):
        if isinstance(g, MixedField):
            if not self.grid.compatible(g.grid):
                raise ParameterError("fields live on different grids")
            return g.samples
        return g

    def __add__(self, g):
        return self.with_samples(self.samples + self._other(g))

    def __sub__(self, g):
        return self.with_samples(self.samples - self._other(g))

    def __mul__(self, c):
        if isinstance(c, MixedField):
            return multiply(self, c)
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_samples(-self.samples)


@dataclass(frozen=True, eq=False)
class VectorField:
    u: MixedField
    v: MixedField

    def __post_init__(self):
        if not self.u.grid.compatible(self.v.grid):
            raise ParameterError("components live on different grids")

    @property
    def grid(self):
        return self.u.grid

    @property
    def components(self):
        return (self.u, self.v)

    def stack(self):
        return np.stack([self.u.samples, self.v.samples])

    @classmethod
    def from_array(cls, grid, arr):
        return cls(MixedField(grid, arr[0]), MixedField(grid, arr[1]))

    @classmethod
    def zeros(cls, grid):
        return cls.from_array(grid, grid.zeros((2,)))

    def __add__(self, w):
        return VectorField(self.u + w.u, self.v + w.v)

    def __sub__(self, w):
        return VectorField(self.u - w.u, self.v - w.v)

    def __mul__(self, c):
        return VectorField(self.u * c, self.v * c)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(-self.u, -self.v)

    def divergence(self):
        return ddx(self.u) + ddy(self.v)

    def wall_residual(self):
        """max |v(xi, 0)| extrapolated from the first real panel."""
        return float(np.abs(wall_values_a(self.grid, self.v.samples)).max())

    def divergence_residual(self, theta=None, rel=True):
        from .norms import d_norm, combined_norm
        th = self.grid.family.theta_max if theta is None else theta
        r = d_norm(self.divergence(), th, 0).d_norm_m
        if not rel:
            return r
        scale = d_norm(self.u, th, 1).d_norm_m + d_norm(self.v, th, 1).d_norm_m
        return r / scale if scale > 0 else r

    def is_divergence_free(self, tol=1e-8, theta=None):
        return self.divergence_residual(theta) <= tol

    def is_wall_compatible(self, tol=1e-10):
        scale = max(np.abs(self.u.samples).max(), np.abs(self.v.samples).max(), 1e-300)
        return self.wall_residual() <= tol * max(scale, 1.0)


# ---------------------------------------------------------------- array ops

def _ddy_matrices(grid):
    fam = grid.family
    key = "ddy"
    if key not in grid.cache:
        grid.cache[key] = (diff_matrix(fam.panel_order), 1.0 / fam.panel_h)
    return grid.cache[key]


def ddx_a(grid, arr):
    return arr * (1j * grid.xi)[:, None]


def ddy_a(grid, arr):
    D, inv_h = _ddy_matrices(grid)
    p = D.shape[0]
    lead = arr.shape[:-1]
    r = arr.reshape(lead + (-1, p))
    out = np.einsum("ij,...pj->...pi", D, r) * inv_h[:, None]
    return out.reshape(arr.shape)


def riesz_a(grid, arr):
    return arr * (1j * np.sign(grid.xi))[:, None]


def _pad_len(K):
    n = 3 * K + 2
    # next length with small prime factors keeps the FFT fast
    while max(_factor(n)) > 7:
        n += 1
    return n


def _factor(n):
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out or [1]


def to_physical_a(grid, c):
    """Values on the padded x-grid (3K + 1 or more points) from mode coefficients."""
    K = grid.K
    N = _pad_len(K)
    full = np.zeros(c.shape[:-2] + (N, c.shape[-1]), dtype=complex)
    full[..., :K + 1, :] = c[..., K:, :]
    full[..., N - K:, :] = c[..., :K, :]
    return scipy.fft.ifft(full, axis=-2, norm="forward")


def from_physical_a(grid, phys):
    K = grid.K
    c = scipy.fft.fft(phys, axis=-2, norm="forward")
    return np.concatenate([c[..., c.shape[-2] - K:, :], c[..., :K + 1, :]], axis=-2)


def multiply_a(grid, a, b):
    """Truncated convolution over modes, exact for |k| <= K.

    Zero-padding to at least 3K + 1 points removes every aliased
    interaction from the retained modes.
    """
    shape = np.broadcast_shapes(a.shape, b.shape)
    prod = to_physical_a(grid, np.broadcast_to(a, shape)) * to_physical_a(grid, np.broadcast_to(b, shape))
    return from_physical_a(grid, prod)


def wall_values_a(grid, arr):
    """Values at y = 0 from the first panel of the real path."""
    key = "wall"
    if key not in grid.cache:
        p = grid.family.panel_order
        grid.cache[key] = lagrange_matrix(p, np.array([-1.0]))[0]
    row = grid.cache[key]
    p = row.size
    return arr[..., :p] @ row


def interp_real_a(grid, arr, y):
    """Evaluate samples on the real path at arbitrary points 0 <= y <= Y_max."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    pth = grid.family.real_path
    a, b = pth.panel_a.real, pth.panel_b.real
    if np.any(y < a[0] - 1e-14) or np.any(y > b[-1] + 1e-14):
        raise ParameterError("evaluation points outside the real grid")
    pan = np.clip(np.searchsorted(b, y, side="left"), 0, a.size - 1)
    s = (2 * y - a[pan] - b[pan]) / (b[pan] - a[pan])
    L = lagrange_matrix(pth.p, s)
    real = arr[..., pth.slice]
    p = pth.p
    blocks = real.reshape(real.shape[:-1] + (-1, p))
    return np.einsum("...nk,nk->...n", blocks[..., pan, :], L)


def panel_derivatives_at_end_a(grid, arr, path_index, order=2):
    """Values and first ``order`` derivatives at the end of a path.

    ``arr`` holds the samples of that path only.
    """
    pth = grid.family.paths[path_index]
    p = pth.p
    D = diff_matrix(p)
    row = lagrange_matrix(p, np.array([1.0]))[0]
    h = pth.half_lengths[-1]
    last = arr[..., -p:]
    out, r = [], row
    for j in range(order + 1):
        out.append(last @ r / h ** j)
        r = r @ D
    return out


# ---------------------------------------------------------------- field ops

def _check(f):
    if not isinstance(f, MixedField):
        raise ParameterError("expected a MixedField")


def ddx(f):
    _check(f)
    return f.with_samples(ddx_a(f.grid, f.samples))


def ddy(f):
    _check(f)
    w = f.warnings
    if not f.resolved and "under-resolved" not in w:
        w = w + ("under-resolved",)
    return MixedField(f.grid, ddy_a(f.grid, f.samples), w)


def riesz(f):
    _check(f)
    return f.with_samples(riesz_a(f.grid, f.samples))


def multiply(f, g):
    _check(f)
    _check(g)
    if not f.grid.compatible(g.grid):
        raise ParameterError("fields live on different grids")
    return MixedField(f.grid, multiply_a(f.grid, f.samples, g.samples), f.warnings + g.warnings)


def reflection_coefficients(m):
    """Coefficients c_1..c_{m+1} with sum_k c_k (-1/k)^j = 1 for j = 0..m."""
    n = m + 1
    k = np.arange(1, n + 1)
    V = (-1.0 / k)[None, :] ** np.arange(n)[:, None]
    return np.linalg.solve(V, np.ones(n))


def sobolev_extend_a(grid, arr, m):
    """Order-m reflection of real-path samples onto the mirrored real grid.

    Returns ``(y, values)`` with ``y`` covering [-Y_max, Y_max].  For y < 0
    the extension is ``sum_k c_k f(-y / k)``; it reproduces polynomials of
    degree <= m and is C^m across y = 0.
    """
    pth = grid.family.real_path
    yr = pth.nodes.real
    c = reflection_coefficients(m)
    neg = np.zeros(arr.shape[:-1] + (yr.size,), dtype=complex)
    for k, ck in enumerate(c, start=1):
        neg = neg + ck * interp_real_a(grid, arr, yr / k)
    y = np.concatenate([-yr[::-1], yr])
    vals = np.concatenate([neg[..., ::-1], arr[..., pth.slice]], axis=-1)
    return y, vals


def sobolev_extend(f, m):
    _check(f)
    return sobolev_extend_a(f.grid, f.samples, m)
