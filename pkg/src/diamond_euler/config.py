"""Flat typed configuration for batch runs.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment.  Values are Python literals (``64``, ``0.4``, ``"diamond"``,
``(0.2, 0.1)``, ``None``); a bare word is read as a string.  Keys not in
SCHEMA are rejected, so a typo never silently falls back to a default.
"""
import ast
import math
import os

from .errors import DataError, ParameterError

# key: (type, default, description).  Types: int, float, str, bool, tuple,
# dict, "float?" (float or None), "beta" (float or "auto").
SCHEMA = {
    "grid.K": (int, 64, "retained Fourier modes |k| <= K"),
    "grid.L_x": (float, 2 * math.pi, "period in x"),
    "grid.J": (int, 8, "number of complex contours besides the real axis"),
    "grid.nodes": (int, 64, "nodes per contour segment"),
    "grid.tail_nodes": (int, 192, "nodes on the real tail"),
    "grid.Y_max": (float, 8.0, "truncation of the normal variable"),
    "grid.theta_max": (float, 0.6, "largest contour angle"),
    "grid.kind": (str, "diamond", "diamond or conoid"),
    "grid.panel_order": (int, 16, "Gauss-Legendre points per panel"),
    "space.theta0": (float, 0.4, "initial analyticity angle"),
    "space.m": (int, 3, "derivative order of the norms"),
    "space.a": (float, 0.5, "start of the Sobolev region"),
    "space.gamma": (float, 0.5, "time-weight exponent"),
    "solver.beta": ("beta", 4.0, "shrink rate, or auto for the doubling search"),
    "solver.T": ("float?", None, "horizon; None means (theta0 - theta_bar) / beta"),
    "solver.T_bar": ("float?", None, "target horizon for beta = auto"),
    "solver.max_doublings": (int, 6, "beta doublings allowed by the auto search"),
    "solver.theta_bar": ("float?", None, "smallest angle reached; None means theta0 / 2"),
    "solver.R": ("float?", None, "ball radius; None means 5 R0"),
    "solver.n_steps": (int, 20, "time steps"),
    "solver.outer_tol": (float, 1e-9, "outer stop, relative to R0"),
    "solver.max_outer": (int, 30, "outer iteration cap"),
    "solver.picard_tol": (float, 1e-11, "Picard stop"),
    "solver.max_picard": (int, 60, "Picard iteration cap"),
    "solver.eps_schedule": (tuple, (0.0,), "mollifier widths, decreasing; (0.0,) disables"),
    "datum.name": (str, "perturbed_shear", "catalog entry"),
    "datum.params": (dict, {}, "overrides of the catalog entry"),
    "datum.input": (str, "", "snapshot file used instead of the catalog"),
    "linear.drift": (str, "uniform", "uniform (1, 0) or a catalog entry"),
    "linear.eps": (float, 0.0, "mollifier width for solve-linear"),
    "mollify.eps": (float, 0.1, "mollifier width"),
    "strip.y_slice": (float, 0.5, "height of the spectral slice"),
    "strip.floor": (float, 1e-13, "relative spectral floor"),
    "probe.theta_prime": (float, 0.4, "outer angle of the Cauchy pairs"),
    "probe.d0": (float, 0.2, "largest angle gap"),
    "probe.halvings": (int, 4, "number of gap halvings"),
    "probe.eps_list": (tuple, (0.2, 0.1, 0.05, 0.025), "mollifier sweep"),
    "probe.betas": (tuple, (4.0, 8.0, 16.0), "transport sweep"),
    "run.threads": (int, 0, "FFT worker threads; 0 means all cores"),
    "run.seed": (int, 0, "seed for random catalog entries"),
}


def _coerce(key, raw):
    typ = SCHEMA[key][0]
    if isinstance(raw, str):
        try:
            val = ast.literal_eval(raw.strip())
        except (ValueError, SyntaxError):
            val = raw.strip()
    else:
        val = raw
    try:
        if typ is bool:
            if isinstance(val, str):
                val = val.lower() in ("1", "true", "yes", "on")
            return bool(val)
        if typ is int:
            if isinstance(val, float) and not val.is_integer():
                raise ValueError
            return int(val)
        if typ is float:
            return float(val)
        if typ is str:
            return "" if val is None else str(val)
        if typ is tuple:
            if isinstance(val, (int, float)):
                return (float(val),)
            return tuple(float(v) for v in val)
        if typ is dict:
            if not isinstance(val, dict):
                raise ValueError
            return dict(val)
        if typ == "float?":
            return None if val is None or val == "None" else float(val)
        if typ == "beta":
            return "auto" if val == "auto" else float(val)
    except (TypeError, ValueError):
        pass
    raise ParameterError(f"bad value for {key}: {raw!r}")


def _strip_comment(raw):
    try:
        ast.literal_eval(raw)
        return raw
    except (ValueError, SyntaxError):
        return raw.split("#", 1)[0].strip()


def parse_lines(lines, source="<config>"):
    out = {}
    for no, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"{source}:{no}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ParameterError(f"{source}:{no}: unknown key {key}")
        out[key] = _coerce(key, _strip_comment(raw))
    return out


def load_config(path=None, overrides=()):
    """Defaults, then the file at ``path``, then ``key=value`` overrides."""
    cfg = {k: v[1] for k, v in SCHEMA.items()}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg.update(parse_lines(fh.readlines(), path))
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc}") from exc
    cfg.update(parse_lines(overrides, "--override"))
    validate(cfg)
    return cfg


def validate(cfg):
    def need(cond, msg):
        if not cond:
            raise ParameterError(msg)
    need(cfg["grid.K"] >= 1, "grid.K must be positive")
    need(cfg["grid.L_x"] > 0, "grid.L_x must be positive")
    need(cfg["grid.J"] >= 1, "grid.J must be positive")
    need(cfg["grid.kind"] in ("diamond", "conoid"), "grid.kind must be diamond or conoid")
    need(0 < cfg["grid.theta_max"] < math.pi / 2, "grid.theta_max outside (0, pi/2)")
    need(0 < cfg["space.theta0"] <= cfg["grid.theta_max"], "space.theta0 outside (0, grid.theta_max]")
    need(cfg["space.m"] >= 0, "space.m must be nonnegative")
    need(0 < cfg["space.a"] < cfg["grid.Y_max"], "space.a outside (0, Y_max)")
    need(0 < cfg["space.gamma"] < 1, "space.gamma outside (0, 1)")
    b = cfg["solver.beta"]
    need(b == "auto" or b > 0, "solver.beta must be positive or auto")
    need(cfg["solver.n_steps"] >= 1, "solver.n_steps must be positive")
    eps = cfg["solver.eps_schedule"]
    need(len(eps) >= 1 and all(e >= 0 for e in eps), "solver.eps_schedule needs nonnegative entries")
    need(all(x > y for x, y in zip(eps, eps[1:])), "solver.eps_schedule must be decreasing")
    need(cfg["mollify.eps"] > 0, "mollify.eps must be positive")
    need(cfg["linear.eps"] >= 0, "linear.eps must be nonnegative")
    need(cfg["run.threads"] >= 0, "run.threads must be nonnegative")
    need(cfg["probe.halvings"] >= 0, "probe.halvings must be nonnegative")
    need(0 < cfg["probe.d0"] < cfg["probe.theta_prime"] <= cfg["grid.theta_max"],
         "need 0 < probe.d0 < probe.theta_prime <= grid.theta_max")


def threads(cfg):
    return cfg["run.threads"] or os.cpu_count() or 1


def describe():
    """The schema as text, one key per line."""
    return "\n".join(f"{k} = {v[1]!r}    # {v[2]}" for k, v in SCHEMA.items())
