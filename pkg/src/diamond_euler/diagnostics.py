"""Analyticity-strip fits and empirical probes of the analytic estimates.

Every probe returns a ProbeReport carrying its sweep, the raw ratios and a
pass flag for the qualitative law being tested.  Measured constants are
sups over the published sweep, not true suprema.
"""
from dataclasses import asdict, dataclass, field
import csv
import io
import json
import math
import os

import numpy as np

from .errors import DataError, ResolutionError
from .field import MixedField, VectorField, ddy_a, from_physical_a, interp_real_a, to_physical_a
from .norms import (NormHistory, TimeWeightedConfig, analytic_norms, asano_check, asano_factor,
                    combined_norm, d_norm, derivative_stack, multi_indices, sobolev_norm,
                    sobolev_norms, weighted_gamma_norm)
from .projector import advection_a, project, project_a, project_bilinear

CSV_COLUMNS = ("t", "theta_lb", "delta_fit", "d_norm", "sobolev_norm", "combined",
               "contraction_ratio")
SCHEMA_VERSION = 1


@dataclass
class StripFit:
    t: float
    delta: float
    fit_window: tuple
    residual: float
    theta_lb: float = None
    lower_bound: bool = False


@dataclass
class ProbeReport:
    name: str
    sweep: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    passed: bool = True
    notes: str = ""

    def to_dict(self):
        return asdict(self)


def _spectrum_at(f, y_slice):
    """|f(xi_k, y_slice)| for k = 0..K (max over +-k); f may be a VectorField."""
    comps = f.components if isinstance(f, VectorField) else (f,)
    grid = comps[0].grid
    amp = 0.0
    for c in comps:
        vals = interp_real_a(grid, c.samples, [y_slice])[:, 0]
        amp = amp + np.abs(vals) ** 2
    amp = np.sqrt(amp)
    K = grid.K
    return grid.xi[K:], np.maximum(amp[K:], amp[K::-1])


def fit_strip(f, y_slice=0.5, floor=1e-13, skip=4, min_modes=8, t=0.0, theta_lb=None):
    """Fit log|f(xi, y_slice)| ~ c - delta |xi| over the resolved modes."""
    xi, amp = _spectrum_at(f, y_slice)
    top = amp.max()
    if not top > 0:
        raise ResolutionError("zero spectrum: nothing above the floor")
    above = amp > floor * top
    k_lo = skip
    k_hi = k_lo
    while k_hi + 1 < amp.size and above[k_hi + 1]:
        k_hi += 1
    if k_lo >= amp.size or not above[k_lo]:
        n_win = 0
    else:
        n_win = k_hi - k_lo + 1
    if n_win < min_modes:
        # too few modes above the floor for a nonzero field: the spectrum falls
        # faster than any rate the window can express
        lo_amp = amp[k_lo] if k_lo < amp.size and above[k_lo] else top
        stop = min(k_hi + 1 if n_win else k_lo, amp.size - 1)
        span = max(xi[stop] - xi[min(k_lo, stop)], xi[1] - xi[0])
        delta = math.log(max(lo_amp, floor * top) / (floor * top)) / span
        return StripFit(t, float(max(delta, 0.0)), (int(k_lo), int(k_lo + n_win - 1)), math.nan,
                        theta_lb, True)
    sel = slice(k_lo, k_hi + 1)
    A = np.stack([np.ones(n_win), -xi[sel]], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, np.log(amp[sel]), rcond=None)
    resid = float(np.sqrt(res[0] / n_win)) if res.size else 0.0
    return StripFit(t, float(max(coef[1], 0.0)), (int(k_lo), int(k_hi)), resid, theta_lb, False)


def _stable(ratios, factor=2.0):
    r = [x for x in ratios if x is not None and np.isfinite(x)]
    return all(b <= factor * a + 1e-300 for a, b in zip(r, r[1:]))


def dyadic_pairs(theta_prime, d0, halvings):
    return [(theta_prime - d0 / 2 ** k, theta_prime) for k in range(halvings + 1)]


def probe_cauchy(f, theta_pairs, m=0):
    """|d_y f|_{m,theta} (th' - th) / |f|_{m,th'}  and the twice-applied variant."""
    g = f.grid
    d1 = MixedField(g, ddy_a(g, f.samples))
    d2 = MixedField(g, ddy_a(g, d1.samples))
    rows, r1s, r2s = [], [], []
    for th, thp in theta_pairs:
        base = d_norm(f, thp, m).d_norm_m
        gap = thp - th
        if base == 0:
            r1 = r2 = 0.0
        else:
            r1 = d_norm(d1, th, m).d_norm_m * gap / base
            r2 = d_norm(d2, th, m).d_norm_m * gap ** 2 / base
        rows.append({"theta": th, "theta_prime": thp, "ratio": r1, "ratio_twice": r2})
        r1s.append(r1)
        r2s.append(r2)
    ok = bool(np.all(np.isfinite(r1s + r2s)) and _stable(r1s) and _stable(r2s))
    return ProbeReport("cauchy", rows, {"c_cau": max(r1s, default=0.0),
                                        "c_cau2": max(r2s, default=0.0)}, ok)


def probe_projection(fields, theta_pairs, m=0, a=0.5, pairs=()):
    """Linear bound of P and the bilinear Cauchy bound of P((v . grad) u).

    ``fields`` is a list of VectorFields; ``pairs`` a list of (v, u) tuples
    of divergence-free fields for the bilinear and difference forms.
    """
    rows, cP, cPa = [], [], []
    thp_max = max(p[1] for p in theta_pairs)
    for i, w in enumerate(fields):
        Pw = project(w)
        den = combined_norm(w, thp_max, m, a)
        num = d_norm(Pw.u, thp_max, m).d_norm_m + d_norm(Pw.v, thp_max, m).d_norm_m
        r = num / den if den > 0 else 0.0
        rows.append({"kind": "linear", "field": i, "theta": thp_max, "ratio": r})
        cP.append(r)
    per_pair = []
    for j, (v, u) in enumerate(pairs):
        out = project_bilinear(v, u, check=False)
        seq = []
        for th, thp in theta_pairs:
            den = combined_norm(v, thp, m, a) * combined_norm(u, thp, m, a)
            num = d_norm(out.u, th, m).d_norm_m + d_norm(out.v, th, m).d_norm_m
            r = num * (thp - th) / den if den > 0 else 0.0
            rows.append({"kind": "bilinear", "pair": j, "theta": th, "theta_prime": thp, "ratio": r})
            seq.append(r)
            cPa.append(r)
        per_pair.append(seq)
        # difference form: P(u1.grad u1) - P(u2.grad u2) against |u1 - u2| (|u1| + |u2|)
        d_out = project_bilinear(v, v, check=False) - project_bilinear(u, u, check=False)
        th, thp = theta_pairs[-1]
        den = combined_norm(v - u, thp, m, a) * (combined_norm(v, thp, m, a) + combined_norm(u, thp, m, a))
        num = d_norm(d_out.u, th, m).d_norm_m + d_norm(d_out.v, th, m).d_norm_m
        rows.append({"kind": "difference", "pair": j, "theta": th, "theta_prime": thp,
                     "lhs": num * (thp - th), "rhs_norm": den,
                     "ratio": num * (thp - th) / den if den > 0 else 0.0})
    ok = bool(all(np.isfinite(cP)) and all(np.isfinite(cPa)) and all(_stable(s) for s in per_pair))
    return ProbeReport("projection", rows, {"c_P": max(cP, default=0.0),
                                            "c_Pa": max(cPa, default=0.0)}, ok)


def probe_mollifier(f_diamond, f_conoid, eps_list, theta, m=0, a=0.5):
    """C(eps) = |J_eps f|^C_{m,theta} / (|f|^D_{m,theta} + ||f||_{m,a}) and the
    linearity of log C(eps) in 1/eps."""
    from .mollifier import mollify
    from .norms import c_norm
    den = d_norm(f_diamond, theta, m).d_norm_m + sobolev_norm(f_diamond, a, m)
    rows, xs, ys = [], [], []
    for e in eps_list:
        num = c_norm(mollify(f_conoid, e, max(m, 1)), theta, m).c_norm_m
        C = num / den
        rows.append({"eps": e, "C": C})
        xs.append(1.0 / e)
        ys.append(math.log(C))
    xs, ys = np.array(xs), np.array(ys)
    slope, icpt = np.polyfit(xs, ys, 1)
    pred = slope * xs + icpt
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
    grows = bool(np.all(np.diff(ys) > 0))
    return ProbeReport("mollifier_c_vs_d", rows, {"slope": float(slope), "r2": r2},
                       bool(grows and r2 >= 0.95))


def _trace_at(grid, arr, a):
    return interp_real_a(grid, arr, [a])[..., 0]


def _x_integral(grid, *cols):
    """Integral over one period of a product of real fields given by mode columns."""
    phys = 1.0
    for c in cols:
        phys = phys * to_physical_a(grid, c[..., None])[..., 0]
    return float(np.real(phys.mean(axis=-1)) * grid.L_x)


def _pressure_a(grid, drift, u):
    """Mode columns of p and d_y p with grad p = -(I - P)((drift . grad) u).

    The k = 0 column of p is fixed to zero; only its y-derivative is defined.
    """
    adv = advection_a(grid, drift, u, substitute=False)
    Pt, Pn = project_a(grid, adv[0], adv[1])
    gx, gy = -(adv[0] - Pt), -(adv[1] - Pn)
    xi = grid.xi[:, None]
    p = np.where(xi != 0, gx / np.where(xi != 0, 1j * xi, 1.0), 0.0)
    return p, gy


def boundary_terms(grid, u, drift, m, a=0.5):
    """(BT1, BT2, trace_u, trace_p) at y = a, with n = (0, -1).

    ``trace_u`` is sum over |alpha| <= m of int |D^alpha u|^2 dx at y = a and
    ``trace_p`` the same for the pressure.
    """
    p, py = _pressure_a(grid, drift, u)
    xi = grid.xi[:, None]
    v2a = _trace_at(grid, drift[1], a)
    Du = derivative_stack(grid, u, m)
    bt1 = bt2 = tr_u = tr_p = 0.0
    for q, (i, j) in enumerate(multi_indices(m)):
        t1 = _trace_at(grid, Du[q, 0], a)
        t2 = _trace_at(grid, Du[q, 1], a)
        bt1 -= _x_integral(grid, v2a, t1, t1) + _x_integral(grid, v2a, t2, t2)
        if j == 0:
            Dp = p
        else:
            Dp = py
            for _ in range(j - 1):
                Dp = ddy_a(grid, Dp)
        tp = _trace_at(grid, Dp * (1j * xi) ** i, a)
        bt2 -= _x_integral(grid, tp, t2)
        tr_u += grid.L_x * float((np.abs(t1) ** 2).sum() + (np.abs(t2) ** 2).sum())
        tr_p += grid.L_x * float((np.abs(tp) ** 2).sum())
    return 0.5 * abs(bt1), bt2, tr_u, tr_p


def probe_energy_boundary(grid, times, states, theta0, beta, m=3, a=0.5, drift=None):
    """Boundary terms of the energy identity at y = a against their bounds.

    Measured per stored time, with theta = theta0 - beta t, N = |u|^D_{m,theta},
    S = ||u||_{m,a} and R the combined norm of the drift:

      c_SobCau = int (D u)^2 dx / (N / theta)^2
      A_BT1    = BT1 / (R (N / theta)^2)
      A_BT2    = BT2 / (R (S^2 + (N / theta)^2))
      A_p      = (int (D p)^2 dx)^(1/2) / (R (N + S))
    """
    if states is None or len(states) == 0:
        raise DataError("no stored states")
    if len(times) != len(states) or (drift is not None and len(drift) != len(states)):
        raise DataError("snapshot count does not match the time grid")
    rows = []
    for i, t in enumerate(times):
        u = np.asarray(states[i])
        v = u if drift is None else np.asarray(drift[i])
        bt1, bt2, tr_u, tr_p = boundary_terms(grid, u, v, m, a)
        th = theta0 - beta * t
        if th <= 0:
            continue
        N = float(analytic_norms(grid, u, [th], m)[..., 0].sum())
        S = float(sobolev_norms(grid, u, m, a).sum())
        R = float(analytic_norms(grid, v, [th], m)[..., 0].sum() + sobolev_norms(grid, v, m, a).sum())
        q = (N / th) ** 2
        rows.append({"t": float(t), "theta": th, "BT1": bt1, "BT2": bt2,
                     "c_SobCau": tr_u / q if q > 0 else 0.0,
                     "A_BT1": bt1 / (R * q) if R * q > 0 else 0.0,
                     "A_BT2": bt2 / (R * (S * S + q)) if R * (S * S + q) > 0 else 0.0,
                     "A_p": math.sqrt(tr_p) / (R * (N + S)) if R * (N + S) > 0 else 0.0})
    if not rows:
        raise DataError("no stored time lies inside the analyticity budget")
    keys = ("c_SobCau", "A_BT1", "A_BT2", "A_p")
    consts = {k: float(max(r[k] for r in rows)) for k in keys}
    ok = all(math.isfinite(r[k]) for r in rows for k in keys)
    return ProbeReport("energy_boundary", rows, consts, bool(ok))


def asano_report(grid, times, states, theta0, beta, gamma=0.5, m=2, a=0.5, beta_prime=None):
    """The chain of time-weighted norms for a stored history, with b' = 2b by default."""
    bp = 2.0 * beta if beta_prime is None else float(beta_prime)
    if len(times) == 0:
        raise DataError("empty history")
    hist = NormHistory(grid, times, states, m, a)
    left, middle, right, holds = asano_check(hist, TimeWeightedConfig(theta0, beta, gamma), bp)
    row = {"beta": float(beta), "beta_prime": bp, "gamma": float(gamma), "m": int(m),
           "left": left, "middle": middle, "right": right}
    return ProbeReport("asano", [row], {"factor": asano_factor(beta, bp, gamma)}, holds,
                       "left <= middle <= factor * weighted norm at rate beta")


def probe_transport_estimates(drift, u_in, theta0, betas, gamma=0.5, m=1, a=0.5, n_steps=10):
    """Measured C(R, beta) and D(beta) of the linear transport estimates."""
    from .transport import TransportProblem, picard_solve
    rows = []
    for b in betas:
        T = theta0 / (2 * b)
        sol = picard_solve(TransportProblem(drift, u_in, 0.0, theta0, b), T, n_steps)
        cfg = TimeWeightedConfig(theta0, b, gamma)
        integral = sol.states - sol.states[0][None]
        hi = NormHistory(u_in.grid, sol.times, integral, m, a)
        hu = NormHistory(u_in.grid, sol.times, sol.states, m, a)
        wu = weighted_gamma_norm(hu, cfg)
        C = weighted_gamma_norm(hi, cfg) / (wu + hu.sobolev().max())
        growth = max(0.0, float(hu.sobolev().max() - hu.sobolev()[0]))
        rows.append({"beta": b, "T": T, "C": C, "D": growth / wu if wu > 0 else 0.0})
    lb = np.log(betas)
    slope_C = float(np.polyfit(lb, np.log([r["C"] for r in rows]), 1)[0]) if len(betas) > 1 else math.nan
    Ds = [r["D"] for r in rows]
    slope_D = (float(np.polyfit(lb, np.log(Ds), 1)[0])
               if len(betas) > 1 and min(Ds) > 0 else math.nan)
    ok = bool(all(np.diff([r["C"] for r in rows]) < 0))
    return ProbeReport("transport_estimates", rows, {"slope_C": slope_C, "slope_D": slope_D}, ok,
                       "C(R, beta) should fall like 1/beta; D like beta^(-1/2)")


def contraction_scaling(betas, ratios):
    """Slope of log(ratio) against log(beta)."""
    lb, lr = np.log(betas), np.log(ratios)
    return float(np.polyfit(lb, lr, 1)[0])


# ------------------------------------------------------------------ output

def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def time_rows(solution, theta0, beta, m=3, a=0.5, contraction_ratio=None, y_slice=0.5):
    """One dict per stored time with norms and the strip fit."""
    rows = []
    if solution is None:
        return rows
    grid = solution.grid
    for i, t in enumerate(solution.times):
        w = VectorField.from_array(grid, solution.states[i])
        th = max(theta0 - beta * t, 0.0)
        d = sum(d_norm(c, th, m).d_norm_m for c in w.components)
        s = sum(sobolev_norm(c, a, m) for c in w.components)
        try:
            fit = fit_strip(w, y_slice, t=float(t), theta_lb=th)
            delta = fit.delta
        except ResolutionError:
            delta = math.nan
        rows.append({"t": float(t), "theta_lb": float(th), "delta_fit": float(delta),
                     "d_norm": float(d), "sobolev_norm": float(s), "combined": float(d + s),
                     "contraction_ratio": contraction_ratio})
    return rows


def write_csv(rows, path):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for r in rows:
        wr.writerow([_fmt(r.get(c)) for c in CSV_COLUMNS])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())
    return path


def emit_report(out_dir, rows=(), probes=(), trace=None, manifest=None, stem="report"):
    """Write ``<stem>.csv`` and ``<stem>.json`` into ``out_dir``."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = write_csv(list(rows), os.path.join(out_dir, stem + ".csv"))
        doc = {"schema_version": SCHEMA_VERSION,
               "probes": [p.to_dict() if isinstance(p, ProbeReport) else p for p in probes],
               "trace": trace.to_dict() if trace is not None else None,
               "manifest": manifest or {}}
        json_path = os.path.join(out_dir, stem + ".json")
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(doc), fh, sort_keys=True, indent=1)
    except OSError as exc:
        raise DataError(f"cannot write report: {exc}") from exc
    return csv_path, json_path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating,)):
        x = float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x
