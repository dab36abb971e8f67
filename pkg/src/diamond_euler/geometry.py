"""Diamond and conoid domains, the contour fan used for analytic norms, and
the graded Gauss-Legendre panel grids laid along each contour.

Every contour starts at y = 0 and ends at ``Y_max`` on (or, for conoid
paths, parallel to) the real axis.  A diamond path is

    0 -> 1 + i tan(t)  ->  1 + t  ->  Y_max        (segments 0, 1, 2)

and a conoid path is

    0 -> 1 + i tan(t)  ->  Y_max + i tan(t)        (segments 0, 1)

The real tail of a diamond path is not part of the norm contour; it is
carried so that integrals over (y, infinity) can be taken along the same
path.  The angle-zero path is the real-axis grid itself.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ParameterError
from .quadrature import gauss_legendre

DIAMOND = "diamond"
CONOID = "conoid"


def _check_angle(theta):
    if not (0.0 < theta < math.pi / 2):
        raise ParameterError(f"angle {theta!r} outside (0, pi/2)")


@dataclass(frozen=True)
class DiamondDomain:
    theta: float

    def __post_init__(self):
        _check_angle(self.theta)

    corner_re = 1.0

    @property
    def tip_re(self):
        return 1.0 + self.theta

    def contains(self, z, closed=False):
        return contains(self, z, closed=closed)


@dataclass(frozen=True)
class Conoid:
    theta: float

    def __post_init__(self):
        _check_angle(self.theta)

    def contains(self, z, closed=False):
        return contains(self, z, closed=closed)


def contains(domain, z, closed=False):
    """Membership test; strict interior unless ``closed`` is set.

    Works elementwise on arrays.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, np.abs(z.imag)
    t = math.tan(domain.theta)
    if closed:
        lt, gt = np.less_equal, np.greater_equal
    else:
        lt, gt = np.less, np.greater
    wedge = gt(x, 0.0) & (x <= 1.0) & lt(y, x * t)
    if isinstance(domain, DiamondDomain):
        th = domain.theta
        second = (x >= 1.0) & lt(x, 1.0 + th) & lt(y, (1.0 + th - x) * t / th)
    elif isinstance(domain, Conoid):
        second = (x >= 1.0) & lt(y, t)
    else:
        raise ParameterError(f"unknown domain {domain!r}")
    out = wedge | second
    return bool(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DecayProfile:
    theta: float
    kind: str = DIAMOND

    def __post_init__(self):
        if self.kind not in (DIAMOND, CONOID):
            raise ParameterError(f"unknown profile kind {self.kind!r}")
        if not (0.0 <= self.theta < math.pi / 2):
            raise ParameterError(f"angle {self.theta!r} outside [0, pi/2)")


def rho(profile, s):
    """Exponential decay rate of the x-spectrum allowed at height Re y = s."""
    s_arr = np.asarray(s, dtype=float)
    th = profile.theta
    if np.any(s_arr < 0) or (profile.kind == DIAMOND and np.any(s_arr > 1.0 + th + 1e-12)):
        raise ParameterError(f"s outside the profile domain for theta={th}")
    if profile.kind == CONOID:
        out = np.full_like(s_arr, th / 2)
    else:
        out = np.where(s_arr <= 1.0, th / 2, np.clip(1.0 + th - s_arr, 0.0, None) / 2)
    return float(out) if out.ndim == 0 else out


def _graded_breaks(n_panels):
    """Panel breakpoints on [0, 1] clustered toward both ends."""
    b = 0.5 * (1.0 - np.cos(np.pi * np.arange(n_panels + 1) / n_panels))
    b[0], b[-1] = 0.0, 1.0
    return b


def _tail_breaks(n_panels, ratio=1.2):
    """Panel breakpoints on [0, 1] clustered toward 0 only (geometric)."""
    if n_panels == 1:
        return np.array([0.0, 1.0])
    b = (ratio ** np.arange(n_panels + 1) - 1.0) / (ratio ** n_panels - 1.0)
    b[-1] = 1.0
    return b


@dataclass(frozen=True, eq=False)
class Path:
    """One discretized contour, stored as consecutive Gauss panels."""

    theta: float
    panel_a: np.ndarray        # complex panel start points, shape (P,)
    panel_b: np.ndarray        # complex panel end points, shape (P,)
    segment: np.ndarray        # segment id per panel
    p: int
    offset: int                # position of the first node in the family arrays
    nodes: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)       # complex dy weights
    abs_weights: np.ndarray = field(init=False)   # |dy| weights
    node_segment: np.ndarray = field(init=False)

    def __post_init__(self):
        s, w = gauss_legendre(self.p)
        h = 0.5 * (self.panel_b - self.panel_a)
        mid = 0.5 * (self.panel_b + self.panel_a)
        object.__setattr__(self, "nodes", (mid[:, None] + h[:, None] * s).ravel())
        object.__setattr__(self, "weights", (h[:, None] * w).ravel())
        object.__setattr__(self, "abs_weights", (np.abs(h)[:, None] * w).ravel())
        object.__setattr__(self, "node_segment", np.repeat(self.segment, self.p))

    @property
    def n_panels(self):
        return self.panel_a.size

    @property
    def n_nodes(self):
        return self.n_panels * self.p

    @property
    def half_lengths(self):
        return 0.5 * (self.panel_b - self.panel_a)

    @property
    def slice(self):
        return slice(self.offset, self.offset + self.n_nodes)

    @property
    def end(self):
        return complex(self.panel_b[-1])

    def norm_mask(self, kind):
        """Nodes belonging to the norm contour (excludes the real tail of diamond paths)."""
        if kind == DIAMOND:
            return self.node_segment < 2
        return np.ones(self.n_nodes, dtype=bool)


@dataclass(frozen=True, eq=False)
class AnalyticPathFamily:
    theta_max: float
    J: int
    nodes_per_segment: int
    Y_max: float
    kind: str
    tail_nodes: int
    panel_order: int
    paths: tuple

    @property
    def angles(self):
        return np.array([pth.theta for pth in self.paths])

    @property
    def n_nodes(self):
        return sum(pth.n_nodes for pth in self.paths)

    @property
    def nodes(self):
        return np.concatenate([pth.nodes for pth in self.paths])

    @property
    def panel_h(self):
        """Complex half-lengths of all panels, in node order."""
        return np.concatenate([pth.half_lengths for pth in self.paths])

    @property
    def real_path(self):
        return self.paths[0]

    @property
    def real_nodes(self):
        return self.paths[0].nodes.real.copy()

    @property
    def tail_grid(self):
        """Real nodes on [1 + theta_max, Y_max] with their weights."""
        r = self.paths[0]
        sel = r.nodes.real >= 1.0 + self.theta_max
        return r.nodes.real[sel], r.abs_weights[sel]

    def signature(self):
        """Hashable description used to check that two fields share a grid."""
        return (self.theta_max, self.J, self.nodes_per_segment, self.Y_max,
                self.kind, self.tail_nodes, self.panel_order)

    def path_index(self, theta, tol=1e-12):
        idx = np.nonzero(np.abs(self.angles - theta) <= tol)[0]
        if idx.size == 0:
            raise ParameterError(f"angle {theta} is not in the path family")
        return int(idx[0])


def _segment_panels(start, stop, n_nodes, p, graded="both"):
    if n_nodes == 0:
        return np.empty(0, complex), np.empty(0, complex)
    n_panels = n_nodes // p
    b = _graded_breaks(n_panels) if graded == "both" else _tail_breaks(n_panels)
    pts = start + (stop - start) * b
    return pts[:-1].astype(complex), pts[1:].astype(complex)


def build_path_family(theta_max=0.6, J=8, nodes_per_segment=64, Y_max=8.0,
                      kind=DIAMOND, tail_nodes=192, panel_order=16):
    """Build the fan of contours with angles ``j * theta_max / J``, j = 0..J.

    Diamond paths get ``nodes_per_segment`` nodes on each of their two
    segments and ``tail_nodes`` on the real tail.  The angle-zero path has
    no second segment, so its tail starts at 1.  Conoid paths use
    ``tail_nodes`` on their long horizontal segment.
    """
    if kind not in (DIAMOND, CONOID):
        raise ParameterError(f"unknown path kind {kind!r}")
    if not (0.0 < theta_max < math.pi / 2):
        raise ParameterError(f"theta_max={theta_max} outside (0, pi/2)")
    if int(J) != J or J < 1:
        raise ParameterError(f"J={J} must be a positive integer")
    if nodes_per_segment < 8 or tail_nodes < 8:
        raise ParameterError("at least 8 nodes per segment are required")
    if not Y_max > 1.0 + theta_max:
        raise ParameterError(f"Y_max={Y_max} must exceed 1 + theta_max")
    p = min(panel_order, nodes_per_segment, tail_nodes)
    if nodes_per_segment % p or tail_nodes % p:
        raise ParameterError(f"node counts must be multiples of the panel order {p}")
    paths, offset = [], 0
    for j in range(int(J) + 1):
        th = j * theta_max / J
        corner = complex(1.0, math.tan(th))
        pieces = [(_segment_panels(0.0, corner, nodes_per_segment, p), 0)]
        if kind == DIAMOND:
            if j > 0:
                pieces.append((_segment_panels(corner, 1.0 + th, nodes_per_segment, p), 1))
            pieces.append((_segment_panels(1.0 + th, Y_max, tail_nodes, p, "tail"), 2))
        else:
            seg_end = complex(Y_max, math.tan(th))
            pieces.append((_segment_panels(corner, seg_end, tail_nodes, p, "tail"), 1))
        a = np.concatenate([pc[0] for pc, _ in pieces])
        b = np.concatenate([pc[1] for pc, _ in pieces])
        seg = np.concatenate([np.full(pc[0].size, sid) for pc, sid in pieces])
        pth = Path(theta=th, panel_a=a, panel_b=b, segment=seg, p=p, offset=offset)
        offset += pth.n_nodes
        paths.append(pth)
    return AnalyticPathFamily(theta_max=float(theta_max), J=int(J),
                              nodes_per_segment=int(nodes_per_segment), Y_max=float(Y_max),
                              kind=kind, tail_nodes=int(tail_nodes), panel_order=p,
                              paths=tuple(paths))
