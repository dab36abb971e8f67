"""Analytic regularization: a Gaussian cutoff in xi combined with convolution
in y against the rational kernel  A / (1 + y^2)^2,  A = 2 / pi.

The y-convolution acts on the order-m reflection of the field to y < 0.
At a node of contour Gamma(theta_j) it is evaluated as

    int_{-Y_max}^0 K_eps(z - y') Ef(y') dy'  +  int_{Gamma_j} K_eps(z - y') f(y') dy',

the analytic continuation of the real-line convolution (the kernel poles at
z - y' = +-i eps never meet the contour).  Both pieces are product rules
against the panel interpolants of the samples, with a composite Gauss
sub-rule whose pieces are shorter than eps / 2 so that the nearby poles are
resolved.

Past the end of each contour the field is continued by
(c0 + c1 s + c2 s^2) e^{-s}, with the coefficients matched to the value and
two derivatives at the end point.  The continuation is linear in f, so J_eps
stays a linear operator, and it removes the edge layer of width eps that a
hard cut at Y_max would leave in the derivatives.
"""
import math

import numpy as np

from .errors import DomainViolationError, ParameterError
from .field import (MixedField, VectorField, interp_real_a, panel_derivatives_at_end_a,
                    reflection_coefficients)
from .quadrature import gauss_legendre, lagrange_matrix

A_NORM = 2.0 / math.pi
TAIL_RATE = 1.0


class MollifierKernel:
    """K_eps(y) = (A / eps) I0(y / eps) with I0(y) = 1 / (1 + y^2)^2."""

    def __init__(self, epsilon=1.0):
        if not epsilon > 0:
            raise ParameterError(f"epsilon={epsilon} must be positive")
        self.epsilon = float(epsilon)
        self.A = A_NORM

    def __call__(self, y):
        return kernel_eval(y, self.epsilon)

    @staticmethod
    def antiderivative(y):
        """Primitive of A I0 on the real line, equal to +-1/2 at +-infinity."""
        y = np.asarray(y, dtype=float)
        return 0.5 * A_NORM * (y / (1 + y * y) + np.arctan(y))


def kernel_eval(y, epsilon=1.0):
    w = np.asarray(y, dtype=complex) / epsilon
    d = 1 + w * w
    if np.any(np.abs(d) < 1e-300):
        raise DomainViolationError("kernel evaluated at a pole")
    out = A_NORM / (epsilon * d * d)
    if np.isrealobj(y):
        out = out.real
    return out if out.ndim else out[()]


def fourier_cutoff(xi, epsilon):
    return np.exp(-(epsilon * np.asarray(xi)) ** 2 / 2)


def _product_weights(targets, panel_a, panel_b, p, epsilon, q=16):
    """W[i, n] = int K_eps(targets_i - y') l_n(y') dy' over the given panels."""
    s, w = gauss_legendre(q)
    W = np.zeros((targets.size, panel_a.size * p), dtype=complex)
    for m, (a, b) in enumerate(zip(panel_a, panel_b)):
        length = abs(b - a)
        pieces = max(1, int(math.ceil(2 * length / epsilon)))
        edges = np.linspace(-1.0, 1.0, pieces + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        t = (0.5 * (edges[1:] + edges[:-1])[:, None] + half[:, None] * s).ravel()
        wt = (half[:, None] * w).ravel()
        basis = lagrange_matrix(p, t)
        h = 0.5 * (b - a)
        y = 0.5 * (a + b) + h * t
        K = kernel_eval(targets[:, None] - y[None, :], epsilon)
        W[:, m * p:(m + 1) * p] = (K * (wt * h)) @ basis
    return W


def _tail_weights(targets, end, epsilon, sigma=TAIL_RATE, q=16, s_max=60.0):
    """T[i, j] = int_0^inf K_eps(targets_i - end - s) s^j e^{-sigma s} ds for j = 0, 1, 2."""
    x, w = gauss_legendre(q)
    edges = [0.0, 0.5 * epsilon]
    while edges[-1] < s_max / sigma:
        edges.append(2 * edges[-1])
    edges = np.array(edges)
    h = 0.5 * np.diff(edges)
    s = ((0.5 * (edges[1:] + edges[:-1]))[:, None] + h[:, None] * x).ravel()
    ws = (h[:, None] * w).ravel() * np.exp(-sigma * s)
    K = kernel_eval(targets[:, None] - end - s[None, :], epsilon)
    return np.stack([K @ (ws * s ** j) for j in range(3)], axis=1)


def _tail_matrix(grid, index, epsilon, sigma=TAIL_RATE):
    """Map from the samples of one path to the tail integral at each of its nodes."""
    pth = grid.family.paths[index]
    f0, f1, f2 = panel_derivatives_at_end_a(grid, np.eye(pth.n_nodes), index, 2)
    coef = np.stack([f0, f1 + sigma * f0, 0.5 * (f2 + 2 * sigma * f1 + sigma ** 2 * f0)])
    return _tail_weights(pth.nodes, pth.end, epsilon, sigma) @ coef


class MollifierPlan:
    def __init__(self, grid, epsilon, m):
        self.grid, self.epsilon, self.m = grid, float(epsilon), int(m)
        fam = grid.family
        real = fam.real_path
        p = real.p
        # reflection matrix: values of the extension at -y_n from real samples
        yr = real.nodes.real
        X = np.zeros((yr.size, yr.size))
        eye = np.eye(yr.size)
        for k, ck in enumerate(reflection_coefficients(self.m), start=1):
            X += ck * interp_real_a(grid, _embed(grid, eye), yr / k)[:, :].T
        neg_a, neg_b = -real.panel_b[::-1], -real.panel_a[::-1]
        self.paths = []
        for j, pth in enumerate(fam.paths):
            Wn = _product_weights(pth.nodes, neg_a, neg_b, p, self.epsilon)
            # negative-side nodes are the mirrored real nodes in reverse order
            Wn = Wn[:, ::-1] @ X
            Wp = _product_weights(pth.nodes, pth.panel_a, pth.panel_b, pth.p, self.epsilon)
            Wp = Wp + _tail_matrix(grid, j, self.epsilon)
            self.paths.append((pth.slice, Wn, Wp))
        self.cutoff = fourier_cutoff(grid.xi, self.epsilon)

    def apply(self, arr):
        real = arr[..., self.grid.family.real_path.slice]
        out = np.empty(arr.shape, dtype=complex)
        for sl, Wn, Wp in self.paths:
            out[..., sl] = real @ Wn.T + arr[..., sl] @ Wp.T
        return out * self.cutoff[:, None]

    def mass(self):
        """Row sums of the convolution weights: the kernel mass seen by each node."""
        one = np.ones((1, self.grid.family.n_nodes), dtype=complex)
        out = np.empty(one.shape, dtype=complex)
        for sl, Wn, Wp in self.paths:
            out[..., sl] = one[..., :Wn.shape[1]] @ Wn.T + one[..., sl] @ Wp.T
        return out[0]


def _embed(grid, rows):
    """Place rows of real-path values into full node arrays (other paths zero)."""
    full = np.zeros(rows.shape[:-1] + (grid.family.n_nodes,))
    full[..., grid.family.real_path.slice] = rows
    return full


def get_plan(grid, epsilon, m=3):
    key = ("mollifier", float(epsilon), int(m))
    if key not in grid.cache:
        grid.cache[key] = MollifierPlan(grid, epsilon, m)
    return grid.cache[key]


def mollify_a(grid, arr, epsilon, m=3):
    if not epsilon > 0:
        raise ParameterError(f"epsilon={epsilon} must be positive")
    return get_plan(grid, epsilon, m).apply(arr)


def mollify(f, eps, m=3):
    """J_eps applied to a scalar or vector field."""
    if isinstance(f, VectorField):
        return VectorField(mollify(f.u, eps, m), mollify(f.v, eps, m))
    return MixedField(f.grid, mollify_a(f.grid, f.samples, eps, m), f.warnings)
