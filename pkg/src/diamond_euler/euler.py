"""Nonlinear iteration for the Euler equations in the half-plane,

    u^{n+1}(t) = u_in - int_0^t P((u^n . grad) u^{n+1}) ds,     u^0 = 0,

where each step is a linear transport problem in the unknown u^{n+1}
solved by the Picard/Volterra solver.  Differences zeta^{n+1} = u^{n+1} - u^n
are measured in time-weighted analytic norms whose shrink rate follows
beta_n = beta (1 - 2^{-(n+1)}).
"""
from dataclasses import asdict, dataclass, field
import json
import logging
import math

import numpy as np

from .errors import DivergenceError, NonConvergenceError, ParameterError
from .field import VectorField
from .norms import NormHistory, TimeWeightedConfig, combined_norm, weighted_gamma_norm
from .transport import TransportProblem, TransportSolution, apply_F_a, eps_continuation, picard_solve

log = logging.getLogger(__name__)


def beta_schedule(beta, n):
    if n < 0:
        raise ParameterError("n must be nonnegative")
    return beta * (1.0 - 2.0 ** (-(n + 1)))


@dataclass
class EulerRun:
    u_in: VectorField
    theta0: float = 0.4
    beta: float = 4.0
    gamma: float = 0.5
    T: float = None
    theta_bar: float = None
    m: int = 3
    a: float = 0.5
    R: float = None
    outer_tol: float = 1e-9
    max_outer: int = 30
    n_steps: int = 20
    eps_schedule: tuple = (0.0,)
    picard_tol: float = 1e-11
    max_picard: int = 60

    def __post_init__(self):
        if self.m < 3:
            raise ParameterError("m must be at least 3")
        if not (0 < self.theta0 < math.pi / 2):
            raise ParameterError("theta0 outside (0, pi/2)")
        if self.theta0 > self.u_in.grid.family.theta_max + 1e-12:
            raise ParameterError("theta0 exceeds the path family range")
        if not self.beta > 0:
            raise ParameterError("beta must be positive")
        if not (0 < self.gamma < 1):
            raise ParameterError("gamma outside (0, 1)")
        if self.theta_bar is None:
            self.theta_bar = self.theta0 / 2
        if not (0 <= self.theta_bar <= self.theta0 / 2 + 1e-15):
            raise ParameterError("theta_bar must lie in [0, theta0/2]")
        T_max = (self.theta0 - self.theta_bar) / self.beta
        if self.T is None:
            self.T = T_max
        if not (0 < self.T <= T_max * (1 + 1e-12)):
            raise ParameterError(f"T={self.T} must lie in (0, (theta0 - theta_bar)/beta = {T_max:.6g}]")
        self.R0 = combined_norm(self.u_in, self.theta0, self.m, self.a)
        if self.R is None:
            self.R = 5 * self.R0
        if self.R0 > 0 and not self.R > 4 * self.R0:
            raise ParameterError("R must exceed 4 R0")

    @property
    def grid(self):
        return self.u_in.grid

    @property
    def times(self):
        return np.linspace(0.0, self.T, self.n_steps + 1)

    def cfg(self, rate=None):
        return TimeWeightedConfig(self.theta0, self.beta if rate is None else rate, self.gamma)


@dataclass
class TraceRow:
    n: int
    beta_n: float
    u_norm_m: float
    zeta_weighted_beta_n: float
    zeta_weighted_beta: float
    zeta_d_part: float
    zeta_sobolev_part: float
    ratio: float = None
    ratio_beta: float = None
    ball_violation: bool = False
    picard_alpha_max: float = 0.0


@dataclass
class IterationTrace:
    rows: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {"schema_version": 1, "converged": self.converged, "iterations": self.iterations,
                "config": self.config, "rows": [asdict(r) for r in self.rows]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(rows=[TraceRow(**r) for r in d["rows"]], converged=d["converged"],
                   iterations=d["iterations"], config=d["config"])

    @property
    def ratios(self):
        return [r.ratio for r in self.rows if r.ratio is not None]


def outer_iterate(run, u_prev):
    """One step of the iteration: solve the linear problem with drift u_prev.

    ``u_prev`` is an array (nt, 2, n_modes, n_nodes) on ``run.times``.
    Returns the TransportSolution for u^{n+1}.
    """
    base = TransportProblem(drift=u_prev, initial=run.u_in, eps=0.0, theta0=run.theta0,
                            beta=run.beta, picard_tol=run.picard_tol,
                            max_picard=run.max_picard, a=run.a, m=run.m)
    sched = tuple(run.eps_schedule)
    if len(sched) == 1:
        base.eps = sched[0]
        return picard_solve(base, run.T, run.n_steps)
    sol, _ = eps_continuation(base, sched, run.T, run.n_steps)
    return sol


def _zeta_norms(run, zeta, rate):
    hist = NormHistory(run.grid, run.times, zeta, run.m - 1, run.a)
    d = weighted_gamma_norm(hist, run.cfg(rate))
    s = float(hist.sobolev().max())
    return d, s


def difference_norms(u_next, u_prev, run, n, prev_row=None):
    """Trace row for zeta = u_next - u_prev (arrays over the time grid)."""
    zeta = np.asarray(u_next) - np.asarray(u_prev)
    bn = beta_schedule(run.beta, n)
    d_n, s_n = _zeta_norms(run, zeta, bn)
    d_b, s_b = _zeta_norms(run, zeta, run.beta)
    hist_u = NormHistory(run.grid, run.times, u_next, run.m, run.a)
    u_norm = weighted_gamma_norm(hist_u, run.cfg()) + float(hist_u.sobolev().max())
    row = TraceRow(n=n, beta_n=bn, u_norm_m=u_norm, zeta_weighted_beta_n=d_n + s_n,
                   zeta_weighted_beta=d_b + s_b, zeta_d_part=d_b, zeta_sobolev_part=s_b)
    if prev_row is not None:
        if prev_row.zeta_weighted_beta_n > 0:
            row.ratio = row.zeta_weighted_beta_n / prev_row.zeta_weighted_beta_n
        if prev_row.zeta_weighted_beta > 0:
            row.ratio_beta = row.zeta_weighted_beta / prev_row.zeta_weighted_beta
    row.ball_violation = bool(u_norm > run.R)
    return row


def solve(run):
    """Iterate until the weighted (m-1)-norm of zeta falls below outer_tol * R0.

    Returns ``(solution, trace)``; the solution is a TransportSolution
    holding the final iterate on the time grid.
    """
    nt = run.times.size
    shape = (nt, 2) + run.grid.shape
    trace = IterationTrace(config={"theta0": run.theta0, "beta": run.beta, "gamma": run.gamma,
                                   "T": run.T, "theta_bar": run.theta_bar, "m": run.m,
                                   "a": run.a, "R": run.R, "R0": run.R0,
                                   "outer_tol": run.outer_tol, "n_steps": run.n_steps,
                                   "eps_schedule": list(run.eps_schedule)})
    u_prev = np.zeros(shape, dtype=complex)
    scale = run.R0 if run.R0 > 0 else 1.0
    prev_row, bad = None, 0
    sol = None
    for n in range(run.max_outer):
        sol = outer_iterate(run, u_prev)
        row = difference_norms(sol.states, u_prev, run, n, prev_row)
        row.picard_alpha_max = max([r["alpha"] for r in sol.restart_log], default=0.0)
        trace.rows.append(row)
        if row.ball_violation:
            log.warning("iterate %d left the ball of radius R=%g", n + 1, run.R)
        log.info("outer %d: zeta=%.3e ratio=%s", n + 1, row.zeta_weighted_beta, row.ratio)
        u_prev = sol.states
        prev_row = row
        trace.iterations = n + 1
        if row.zeta_weighted_beta <= run.outer_tol * scale:
            trace.converged = True
            break
        if row.ratio is not None and row.ratio >= 1:
            bad += 1
            if bad >= 3:
                raise DivergenceError(
                    f"contraction ratio >= 1 for 3 consecutive iterations at beta={run.beta}; "
                    "increase beta (shorter horizon)")
        else:
            bad = 0
    if not trace.converged:
        raise NonConvergenceError(f"outer iteration did not converge in {run.max_outer} steps")
    return sol, trace


def fixed_point_residual(run, sol):
    """Combined (m-1) norm, sup over time, of u - u_in + int P((u . grad) u) ds."""
    from .transport import _cumtrapz
    u = sol.states
    F = apply_F_a(run.grid, u, u, 0.0, run.m)
    dt = run.times[1] - run.times[0]
    res = u - run.u_in.stack()[None] - _cumtrapz(F, dt)
    out = 0.0
    for i, t in enumerate(run.times):
        th = max(run.theta0 - run.beta * t, 0.0)
        out = max(out, combined_norm(VectorField.from_array(run.grid, res[i]), th, run.m - 1, run.a))
    return out


def solve_auto(run_kwargs, T_bar=None, max_doublings=6):
    """Search beta by doubling from 2 theta0 / T_bar until the iteration contracts.

    The horizon follows beta: T = (theta0 - theta_bar) / beta.  Returns
    ``(solution, trace, run, search_path)``.
    """
    kw = dict(run_kwargs)
    theta0 = kw.get("theta0", 0.4)
    T_bar = T_bar or kw.pop("T_bar", None) or 1.0
    kw.pop("T_bar", None)
    beta = 2 * theta0 / T_bar
    path = []
    for _ in range(max_doublings + 1):
        kw.update(beta=beta, T=None)
        run = EulerRun(**kw)
        try:
            sol, trace = solve(run)
            path.append({"beta": beta, "T": run.T, "status": "converged"})
            return sol, trace, run, path
        except (DivergenceError, NonConvergenceError) as exc:
            path.append({"beta": beta, "T": run.T, "status": type(exc).__name__})
            beta *= 2
    raise DivergenceError(f"no contracting beta found up to {beta / 2:g}; search path {path}")
