"""Linearized transport-pressure problem in Volterra form,

    u(t) = J u_in + int_0^t F(v(s), u(s)) ds,     F = -P J ((v . grad) J u),

solved by Picard iteration with composite-trapezoid time quadrature on
consecutive sub-intervals.  Each sub-interval is short enough that the
measured contraction factor of the iteration stays at or below 1/2; the
solution at its end restarts the iteration on the next one.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .errors import DivergenceError, NonConvergenceError, ParameterError
from .field import VectorField
from .mollifier import mollify_a
from .norms import analytic_norms, sobolev_norms
from .projector import advection_a, project_a

log = logging.getLogger(__name__)


@dataclass
class TransportProblem:
    drift: object            # VectorField (constant in time) or array (nt, 2, n_modes, n_nodes)
    initial: VectorField
    eps: float = 0.0
    theta0: float = 0.4
    beta: float = 1.0
    picard_tol: float = 1e-10
    max_picard: int = 60
    picard_order: int = 0
    a: float = 0.5
    m: int = 3

    def __post_init__(self):
        if self.eps < 0:
            raise ParameterError("eps must be nonnegative")
        if self.max_picard < 2:
            raise ParameterError("max_picard must be at least 2")

    @property
    def grid(self):
        return self.initial.grid

    def drift_at(self, times_idx, nt):
        if isinstance(self.drift, VectorField):
            d = self.drift.stack()
            return np.broadcast_to(d, (len(times_idx),) + d.shape)
        arr = np.asarray(self.drift)
        if arr.shape[0] != nt:
            raise ParameterError("drift history does not match the time grid")
        return arr[times_idx]


@dataclass
class TransportSolution:
    times: np.ndarray
    states: np.ndarray        # (nt, 2, n_modes, n_nodes)
    grid: object
    eps: float = 0.0
    restart_log: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    report: dict = field(default_factory=dict)

    def state(self, i):
        return VectorField.from_array(self.grid, self.states[i])

    def manifest(self):
        return {"times": self.times.tolist(), "eps": self.eps,
                "restarts": self.restart_log, "residuals": self.residual_history,
                "report": self.report}


def apply_F_a(grid, v, u, eps, m=3):
    """-P J ((v . grad) J u) on stacked arrays (..., 2, n_modes, n_nodes)."""
    if eps > 0:
        u = mollify_a(grid, u, eps, m)
    adv = advection_a(grid, v, u)
    if eps > 0:
        adv = mollify_a(grid, adv, eps, m)
    Pt, Pn = project_a(grid, adv[..., 0, :, :], adv[..., 1, :, :])
    return -np.stack([Pt, Pn], axis=-3)


def apply_F_eps(v, u, eps=0.0, m=3):
    out = apply_F_a(v.grid, v.stack(), u.stack(), eps, m)
    return VectorField.from_array(v.grid, out)


def _measure(grid, arr, theta, order, a):
    """Combined norm of each state in a stack (nt, 2, ...), components summed."""
    an = analytic_norms(grid, arr, [theta], order)[..., 0]
    sb = sobolev_norms(grid, arr, order, a)
    return (an + sb).sum(axis=-1)


def _cumtrapz(F, dt):
    out = np.zeros_like(F)
    if F.shape[0] > 1:
        out[1:] = np.cumsum(0.5 * dt * (F[1:] + F[:-1]), axis=0)
    return out


def picard_solve(problem, T, n_steps=20):
    """Solve on [0, T] with ``n_steps`` uniform steps."""
    grid = problem.grid
    if not T > 0:
        raise ParameterError("T must be positive")
    if problem.beta * T > problem.theta0 + 1e-12:
        raise ParameterError("T exceeds the admissible window theta0 / beta")
    times = np.linspace(0.0, T, n_steps + 1)
    dt = T / n_steps
    nt = times.size
    u0 = problem.initial.stack()
    if problem.eps > 0:
        u0 = mollify_a(grid, u0, problem.eps, problem.m)
    states = np.zeros((nt,) + u0.shape, dtype=complex)
    states[0] = u0
    sol = TransportSolution(times, states, grid, problem.eps)
    F_of = lambda idx, X: apply_F_a(grid, problem.drift_at(idx, nt), X, problem.eps, problem.m)

    i0 = 0
    scale0 = _measure(grid, u0[None], problem.theta0, problem.picard_order, problem.a)[0]
    if scale0 == 0:
        return sol
    # initial guess of the Lipschitz constant from one application of F
    F0 = F_of([0], u0[None])
    L_est = _measure(grid, F0, problem.theta0, problem.picard_order, problem.a)[0] / scale0
    while i0 < nt - 1:
        n_sub = nt - 1 - i0
        if L_est > 0:
            n_sub = max(1, min(n_sub, int(0.5 / (L_est * dt))))
        while True:
            i1 = i0 + n_sub
            ok, info = _picard_interval(problem, grid, states, times, i0, i1, F_of)
            if ok or n_sub == 1:
                break
            n_sub = max(1, n_sub // 2)
        if not ok and info["alpha"] >= 1:
            raise DivergenceError(
                f"Picard contraction factor {info['alpha']:.3g} >= 1 on one step; "
                f"measured L = {info['L']:.3g}")
        info.update(t_start=float(times[i0]), t_end=float(times[i1]))
        sol.restart_log.append(info)
        sol.residual_history.append(info["residual"])
        log.debug("sub-interval [%g, %g] alpha=%.3g iterations=%d",
                  times[i0], times[i1], info["alpha"], info["iterations"])
        if info["L"] > 0:
            L_est = info["L"]
        i0 = i1
    return sol


def _picard_interval(problem, grid, states, times, i0, i1, F_of):
    idx = list(range(i0, i1 + 1))
    tau = times[i1] - times[i0]
    dt = times[1] - times[0]
    theta = max(problem.theta0 - problem.beta * times[i1], 0.0)
    start = states[i0]
    X = np.broadcast_to(start, (len(idx),) + start.shape).copy()
    scale = max(_measure(grid, X, theta, problem.picard_order, problem.a).max(), 1e-300)
    diffs, ratios = [], []
    for k in range(problem.max_picard):
        Xn = start + _cumtrapz(F_of(idx, X), dt)
        d = _measure(grid, Xn - X, theta, problem.picard_order, problem.a).max() / scale
        X = Xn
        diffs.append(d)
        if len(diffs) >= 2 and diffs[-2] > 1e3 * problem.picard_tol:
            ratios.append(diffs[-1] / diffs[-2])
            if ratios[0] > 0.5 and len(idx) > 2:
                return False, {"alpha": ratios[0], "L": ratios[0] / tau}
            if len(ratios) >= 3 and all(r >= 1 for r in ratios[-3:]):
                return False, {"alpha": max(ratios), "L": max(ratios) / tau}
        if d <= problem.picard_tol:
            break
    else:
        raise NonConvergenceError(
            f"Picard iteration did not reach tol {problem.picard_tol} in {problem.max_picard} steps")
    alpha = max(ratios) if ratios else (diffs[1] / diffs[0] if len(diffs) > 1 and diffs[0] > 0 else 0.0)
    states[i0:i1 + 1] = X
    return True, {"alpha": float(alpha), "L": float(alpha / tau) if tau > 0 else 0.0,
                  "iterations": len(diffs), "residual": float(diffs[-1]), "steps": i1 - i0}


def eps_continuation(problem, eps_schedule, T, n_steps=20):
    """Solve for each eps in a decreasing schedule and measure Cauchy distances."""
    sched = [float(e) for e in eps_schedule]
    if len(sched) >= 2 and any(b >= a for a, b in zip(sched, sched[1:])):
        raise ParameterError("eps_schedule must be strictly decreasing")
    sols = []
    for e in sched:
        p = TransportProblem(**{**problem.__dict__, "eps": e})
        sols.append(picard_solve(p, T, n_steps))
    dists = []
    for s1, s2 in zip(sols, sols[1:]):
        diff = s1.states - s2.states
        th = max(problem.theta0 - problem.beta * T, 0.0)
        dists.append(float(_measure(s1.grid, diff, th, problem.picard_order, problem.a).max()))
    report = {"eps_schedule": sched, "distances": dists}
    if len(dists) >= 2:
        report["monotone"] = bool(all(b < a for a, b in zip(dists, dists[1:])))
        if not report["monotone"]:
            report["warning"] = "distances not decreasing under eps refinement"
            log.warning(report["warning"])
        r = dists[-1] / dists[-2] if dists[-2] > 0 else 0.0
        report["extrapolated_error"] = dists[-1] * r / (1 - r) if r < 1 else math.inf
    elif dists:
        report["extrapolated_error"] = dists[-1]
    final = sols[-1]
    final.report.update(report)
    return final, report
