"""Panel quadrature helpers: Gauss-Legendre nodes, barycentric interpolation,
differentiation matrices and exponential product-integration moments."""
import functools

import numpy as np


@functools.lru_cache(maxsize=None)
def gauss_legendre(p):
    s, w = np.polynomial.legendre.leggauss(p)
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


@functools.lru_cache(maxsize=None)
def _bary_weights(p):
    s, _ = gauss_legendre(p)
    diff = s[:, None] - s[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff * 2.0, axis=1)
    return w / np.abs(w).max()


def lagrange_matrix(p, t):
    """Matrix ``L[n, k] = l_k(t[n])`` for the p-point Gauss-Legendre basis on [-1, 1].

    ``t`` may be complex (used only for real arguments in practice).
    """
    s, _ = gauss_legendre(p)
    w = _bary_weights(p)
    t = np.atleast_1d(np.asarray(t))
    d = t[:, None] - s[None, :]
    exact = d == 0
    d = np.where(exact, 1.0, d)
    c = w[None, :] / d
    L = c / c.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    if rows.any():
        L[rows] = exact[rows].astype(float)
    return L


@functools.lru_cache(maxsize=None)
def diff_matrix(p):
    """Differentiation matrix on the reference interval [-1, 1]."""
    s, _ = gauss_legendre(p)
    w = _bary_weights(p)
    D = np.zeros((p, p))
    for i in range(p):
        for k in range(p):
            if i != k:
                D[i, k] = (w[k] / w[i]) / (s[i] - s[k])
        D[i, i] = -D[i].sum()
    D.setflags(write=False)
    return D


def _subrule(lo, hi, pieces, q):
    """Composite Gauss rule on [lo, hi] split into equal pieces."""
    x, w = gauss_legendre(q)
    edges = np.linspace(lo, hi, pieces + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def decay_moments(mu, p, q=24, reach=6.0):
    """Exponential moments of the Lagrange basis on the reference panel.

    Returns ``(L, E, M)`` with

        L[n, i, k] = int_{-1}^{s_i} exp(-mu_n (s_i - s)) l_k(s) ds
        E[n, k]    = int_{-1}^{1}   exp(-mu_n (1 - s))   l_k(s) ds
        M[n, i, k] = int_{-1}^{s_i} exp(-mu_n (s + 1))   l_k(s) ds

    ``mu`` must have nonnegative real part.  The integrals are evaluated by a
    composite Gauss rule fine enough that ``|mu| * piece_length <= reach``,
    which makes them exact to round-off for the polynomial-times-exponential
    integrand.
    """
    mu = np.asarray(mu, dtype=complex).ravel()
    s, _ = gauss_legendre(p)
    L = np.zeros((mu.size, p, p), dtype=complex)
    M = np.zeros((mu.size, p, p), dtype=complex)
    E = np.zeros((mu.size, p), dtype=complex)
    if mu.size == 0:
        return L, E, M
    pieces = np.maximum(1, np.ceil(2.0 * np.abs(mu) / reach)).astype(int)
    # bucket by powers of two to keep the number of distinct rules small
    buckets = 2 ** np.ceil(np.log2(pieces)).astype(int)
    for nb in np.unique(buckets):
        sel = np.nonzero(buckets == nb)[0]
        m = mu[sel][:, None]
        for i in range(p + 1):
            upper = s[i] if i < p else 1.0
            n_pieces = max(1, int(np.ceil(nb * (upper + 1.0) / 2.0)))
            t, wt = _subrule(-1.0, upper, n_pieces, q)
            basis = lagrange_matrix(p, t)
            kern = np.exp(-m * (upper - t)[None, :]) * wt[None, :]
            vals = kern @ basis
            if i < p:
                L[sel, i, :] = vals
                kern = np.exp(-m * (t + 1.0)[None, :]) * wt[None, :]
                M[sel, i, :] = kern @ basis
            else:
                E[sel, :] = vals
    return L, E, M
