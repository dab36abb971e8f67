"""Command-line front-end.

    diamond-euler <command> [--config FILE] [--override key=value ...]
                  [--out-dir DIR] [--threads N] [--seed S] [--input SNAPSHOT]

Commands: make-datum, project, norms, mollify, solve-linear, solve-euler,
verify-estimates, fit-strip, show-config.  Every command writes its
artifacts and a ``manifest.json`` into the output directory.  Failures exit
with the code of the raised error class and print one line

    error=<Class> code=<n> reason=<text>

on stderr.
"""
import argparse
import contextlib
import json
import logging
import os
import sys

import numpy as np
import scipy.fft

from . import __version__, config as config_mod, diagnostics, snapshot
from .catalog import from_formula, resolve
from .errors import DataError, DiamondEulerError, DivergenceError, ParameterError
from .field import MixedField, VectorField, make_grid

COMMANDS = ("make-datum", "project", "norms", "mollify", "solve-linear", "solve-euler",
            "verify-estimates", "fit-strip", "show-config")
log = logging.getLogger("diamond_euler")


def grid_from(cfg, kind=None):
    return make_grid(cfg["grid.theta_max"], cfg["grid.J"], cfg["grid.nodes"], cfg["grid.Y_max"],
                     cfg["grid.K"], cfg["grid.L_x"], kind or cfg["grid.kind"],
                     cfg["grid.tail_nodes"], cfg["grid.panel_order"])


def datum_from(cfg, grid=None, name=None, params=None):
    if name is None and cfg["datum.input"]:
        return snapshot.load(cfg["datum.input"]).field()
    spec = dict(params if params is not None else cfg["datum.params"])
    spec["name"] = name or cfg["datum.name"]
    if resolve(spec).get("spectrum") == "random":
        spec.setdefault("seed", cfg["run.seed"])
    return from_formula(spec, grid or grid_from(cfg))


def _components(f):
    return f.components if isinstance(f, VectorField) else (f,)


class Outputs:
    def __init__(self, out_dir, command, cfg):
        self.dir = out_dir
        self.command = command
        self.cfg = cfg
        self.artifacts = []
        self.extra = {}
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create {out_dir}: {exc}") from exc

    def path(self, name):
        self.artifacts.append(name)
        return os.path.join(self.dir, name)

    def json(self, name, doc):
        snapshot.write_manifest(self.path(name), diagnostics._jsonable(doc))

    def manifest(self):
        # thread count is deliberately absent: artifacts must not depend on it
        cfg = {k: v for k, v in self.cfg.items() if k != "run.threads"}
        doc = {"command": self.command, "version": __version__, "config": cfg,
               "artifacts": sorted(self.artifacts)}
        doc.update(self.extra)
        snapshot.write_manifest(os.path.join(self.dir, "manifest.json"),
                                diagnostics._jsonable(doc))


# ------------------------------------------------------------------ commands

def cmd_make_datum(cfg, out):
    f = datum_from(cfg)
    snapshot.save(out.path("datum.npz"), f, label=cfg["datum.name"])


def cmd_project(cfg, out):
    from .projector import project
    w = datum_from(cfg)
    if not isinstance(w, VectorField):
        raise ParameterError("project needs a vector field")
    Pw = project(w)
    snapshot.save(out.path("projected.npz"), Pw, label="P " + cfg["datum.name"])
    out.extra["divergence_residual"] = Pw.divergence_residual(cfg["space.theta0"])
    out.extra["wall_residual"] = float(np.abs(Pw.wall_residual()).max())


def cmd_norms(cfg, out):
    from .norms import d_norm
    f = datum_from(cfg)
    th, m = cfg["space.theta0"], cfg["space.m"]
    for name, c in zip(("u", "v") if isinstance(f, VectorField) else ("f",), _components(f)):
        rep = d_norm(c, th, m)
        with open(out.path(f"norms_{name}.json"), "w", encoding="utf-8") as fh:
            fh.write(rep.to_json())


def cmd_mollify(cfg, out):
    from .mollifier import mollify
    f = datum_from(cfg)
    g = mollify(f, cfg["mollify.eps"], max(cfg["space.m"], 1))
    snapshot.save(out.path("mollified.npz"), g, label=f"J_{cfg['mollify.eps']}")


def _uniform_drift(grid):
    u = grid.zeros()
    u[grid.K] = 1.0
    return VectorField(MixedField(grid, u), MixedField(grid, grid.zeros()))


def cmd_solve_linear(cfg, out):
    from .transport import TransportProblem, picard_solve
    grid = grid_from(cfg)
    u0 = datum_from(cfg, grid)
    drift = (_uniform_drift(grid) if cfg["linear.drift"] == "uniform"
             else datum_from(cfg, grid, name=cfg["linear.drift"], params={}))
    beta = 4.0 if cfg["solver.beta"] == "auto" else cfg["solver.beta"]
    th0 = cfg["space.theta0"]
    T = cfg["solver.T"] or (th0 - (cfg["solver.theta_bar"] or th0 / 2)) / beta
    prob = TransportProblem(drift, u0, cfg["linear.eps"], th0, beta,
                            picard_tol=cfg["solver.picard_tol"], max_picard=cfg["solver.max_picard"],
                            a=cfg["space.a"], m=cfg["space.m"])
    sol = picard_solve(prob, T, cfg["solver.n_steps"])
    snapshot.save(out.path("solution.npz"), grid=grid, times=sol.times, states=sol.states)
    rows = diagnostics.time_rows(sol, th0, beta, cfg["space.m"], cfg["space.a"],
                                 y_slice=cfg["strip.y_slice"])
    diagnostics.write_csv(rows, out.path("report.csv"))
    out.json("run.json", sol.manifest())
    out.json("asano.json", diagnostics.asano_report(grid, sol.times, sol.states, th0, beta,
                                                    cfg["space.gamma"], max(cfg["space.m"] - 1, 0),
                                                    cfg["space.a"]).to_dict())


def cmd_solve_euler(cfg, out):
    from .euler import EulerRun, solve, solve_auto
    grid = grid_from(cfg)
    u0 = datum_from(cfg, grid)
    if not isinstance(u0, VectorField):
        raise ParameterError("solve-euler needs a vector datum")
    kw = dict(u_in=u0, theta0=cfg["space.theta0"], gamma=cfg["space.gamma"], T=cfg["solver.T"],
              theta_bar=cfg["solver.theta_bar"], m=cfg["space.m"], a=cfg["space.a"],
              R=cfg["solver.R"], outer_tol=cfg["solver.outer_tol"], max_outer=cfg["solver.max_outer"],
              n_steps=cfg["solver.n_steps"], eps_schedule=cfg["solver.eps_schedule"],
              picard_tol=cfg["solver.picard_tol"], max_picard=cfg["solver.max_picard"])
    if cfg["solver.beta"] == "auto":
        sol, trace, run, path = solve_auto(kw, cfg["solver.T_bar"], cfg["solver.max_doublings"])
        out.extra["beta_search"] = path
    else:
        run = EulerRun(beta=cfg["solver.beta"], **kw)
        try:
            sol, trace = solve(run)
        except DivergenceError as exc:
            raise DivergenceError(f"{exc}; advisory: beta={run.beta:g} is below the contraction "
                                  "threshold, retry with a larger beta or beta=auto") from exc
    ratios = trace.ratios
    rows = diagnostics.time_rows(sol, run.theta0, run.beta, run.m, run.a,
                                 contraction_ratio=ratios[-1] if ratios else None,
                                 y_slice=cfg["strip.y_slice"])
    diagnostics.write_csv(rows, out.path("report.csv"))
    out.json("trace.json", trace.to_dict())
    out.json("asano.json", diagnostics.asano_report(grid, sol.times, sol.states, run.theta0, run.beta,
                                                    run.gamma, run.m - 1, run.a).to_dict())
    snapshot.save(out.path("solution.npz"), grid=grid, times=sol.times, states=sol.states)
    findings = [r["t"] for r in rows if r["delta_fit"] < r["theta_lb"]]
    out.extra["strip_monitor_violations"] = findings
    out.extra["converged_at"] = trace.iterations


def cmd_fit_strip(cfg, out):
    if cfg["datum.input"]:
        snap = snapshot.load(cfg["datum.input"])
        fields = [(float(t), snap.field(i)) for i, t in enumerate(snap.times)]
    else:
        fields = [(0.0, datum_from(cfg))]
    fits = [diagnostics.fit_strip(f, cfg["strip.y_slice"], cfg["strip.floor"], t=t)
            for t, f in fields]
    out.json("strip.json", {"schema_version": diagnostics.SCHEMA_VERSION,
                            "fits": [vars(f) for f in fits]})


def cmd_verify_estimates(cfg, out):
    from .transport import TransportProblem, picard_solve
    grid = grid_from(cfg)
    m, a, th0 = cfg["space.m"], cfg["space.a"], cfg["space.theta0"]
    pairs = diagnostics.dyadic_pairs(cfg["probe.theta_prime"], cfg["probe.d0"], cfg["probe.halvings"])
    probes = []
    for name in ("scalar_packet", "scalar_shear"):
        rep = diagnostics.probe_cauchy(from_formula(name, grid), pairs, m=1)
        rep.name = f"cauchy:{name}"
        probes.append(rep)
    fields = [from_formula(n, grid) for n in ("stream_mode", "wave_packet", "generic", "gradient_packet")]
    probes.append(diagnostics.probe_projection(fields, pairs, m=1, a=a,
                                               pairs=[(fields[0], fields[1])]))
    conoid = grid_from(cfg, kind="conoid")
    probes.append(diagnostics.probe_mollifier(from_formula("scalar_ramp", grid),
                                              from_formula("scalar_ramp", conoid),
                                              cfg["probe.eps_list"], th0, 0, a))
    drift = from_formula("shear", grid)
    u_in = from_formula("stream_mode", grid)
    probes.append(diagnostics.probe_transport_estimates(drift, u_in, th0, list(cfg["probe.betas"]),
                                                        cfg["space.gamma"], 1, a, n_steps=10))
    b0 = cfg["probe.betas"][0]
    sol = picard_solve(TransportProblem(drift, u_in, 0.0, th0, b0), th0 / (2 * b0), 10)
    probes.append(diagnostics.probe_energy_boundary(
        grid, sol.times, sol.states, th0, b0, m, a,
        drift=np.broadcast_to(drift.stack(), sol.states.shape)))
    out.json("probes.json", {"schema_version": diagnostics.SCHEMA_VERSION,
                             "probes": [p.to_dict() for p in probes]})
    out.extra["passed"] = {p.name: p.passed for p in probes}


HANDLERS = {"make-datum": cmd_make_datum, "project": cmd_project, "norms": cmd_norms,
            "mollify": cmd_mollify, "solve-linear": cmd_solve_linear,
            "solve-euler": cmd_solve_euler, "verify-estimates": cmd_verify_estimates,
            "fit-strip": cmd_fit_strip}


def build_parser():
    ap = argparse.ArgumentParser(prog="diamond-euler", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key = value file")
    ap.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--threads", type=int, help="FFT worker threads (results do not depend on it)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--input", help="snapshot file, same as datum.input")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


@contextlib.contextmanager
def _thread_limits(n):
    # FFT workers split independent transforms, so results do not depend on n;
    # BLAS is held at one thread because blocked products may reorder sums.
    from threadpoolctl import threadpool_limits
    with threadpool_limits(limits=1, user_api="blas"), scipy.fft.set_workers(n):
        yield


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        extra = list(args.override)
        if args.threads is not None:
            extra.append(f"run.threads={args.threads}")
        if args.seed is not None:
            extra.append(f"run.seed={args.seed}")
        if args.input:
            extra.append(f"datum.input={args.input!r}")
        cfg = config_mod.load_config(args.config, extra)
        if args.command == "show-config":
            print(config_mod.describe())
            return 0
        out = Outputs(args.out_dir, args.command, cfg)
        with _thread_limits(config_mod.threads(cfg)):
            HANDLERS[args.command](cfg, out)
        out.manifest()
    except DiamondEulerError as exc:
        reason = " ".join(str(exc).split())
        print(f"error={type(exc).__name__} code={exc.exit_code} reason={reason}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # unexpected failure: still one parsable line
        reason = " ".join(str(exc).split())
        print(f"error={type(exc).__name__} code=1 reason={reason}", file=sys.stderr)
        if args.verbose:
            raise
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
