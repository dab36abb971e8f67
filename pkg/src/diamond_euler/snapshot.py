"""Field snapshots on disk.

A snapshot is an ``.npz`` container (no pickling) holding

    format_version   int64 scalar
    kind             unicode, "diamond" or "conoid"
    grid_int         int64 [K, J, nodes_per_segment, tail_nodes, panel_order]
    grid_real        <f8   [L_x, theta_max, Y_max]
    nodes            <f8   (n_nodes, 2), real and imaginary parts of the y-nodes
    times            <f8   (nt,)
    samples          <f8   (nt, ncomp, 2K + 1, n_nodes, 2), interleaved re/im
    label            unicode, free text

ncomp is 1 for a scalar field and 2 for a velocity.  Every float is stored
as a 64-bit little-endian value, so a save/load cycle is bit-exact.
"""
import json
import math
import os
import zipfile

import numpy as np

from .errors import DataError
from .field import MixedField, VectorField, make_grid

FORMAT_VERSION = 1
_KEYS = ("format_version", "kind", "grid_int", "grid_real", "nodes", "times", "samples")


def _interleave(z):
    z = np.asarray(z, dtype=np.complex128)
    return np.stack([z.real, z.imag], axis=-1).astype("<f8")


def _grid_blocks(grid):
    fam = grid.family
    gi = np.array([grid.K, fam.J, fam.nodes_per_segment, fam.tail_nodes, fam.panel_order],
                  dtype="<i8")
    gr = np.array([grid.L_x, fam.theta_max, fam.Y_max], dtype="<f8")
    return fam.kind, gi, gr, _interleave(fam.nodes)


def _as_stack(obj):
    if isinstance(obj, VectorField):
        return obj.grid, obj.stack()[None], (0.0,)
    if isinstance(obj, MixedField):
        return obj.grid, obj.samples[None, None], (0.0,)
    raise DataError(f"cannot snapshot an object of type {type(obj).__name__}")


def save(path, field=None, *, grid=None, times=None, states=None, label=""):
    """Write one field, or a time sequence ``states`` of shape (nt, ncomp, modes, nodes)."""
    if field is not None:
        grid, states, times = _as_stack(field)
    if grid is None or states is None:
        raise DataError("nothing to save")
    states = np.asarray(states)
    if states.ndim == 3:
        states = states[:, None]
    times = np.asarray(times if times is not None else np.zeros(states.shape[0]), dtype="<f8")
    if states.shape[0] != times.size or states.shape[-2:] != grid.shape:
        raise DataError("states do not match the grid or the time axis")
    kind, gi, gr, nodes = _grid_blocks(grid)
    try:
        with open(path, "wb") as fh:
            np.savez(fh, format_version=np.array(FORMAT_VERSION, dtype="<i8"), kind=np.array(kind),
                     grid_int=gi, grid_real=gr, nodes=nodes, times=times,
                     samples=_interleave(states), label=np.array(str(label)))
    except OSError as exc:
        raise DataError(f"cannot write snapshot {path}: {exc}") from exc
    return path


class Snapshot:
    """Loaded snapshot: ``grid``, ``times`` and ``states`` (nt, ncomp, modes, nodes)."""

    def __init__(self, grid, times, states, label=""):
        self.grid, self.times, self.states, self.label = grid, times, states, label

    @property
    def ncomp(self):
        return self.states.shape[1]

    def field(self, i=-1):
        st = self.states[i]
        if self.ncomp == 1:
            return MixedField(self.grid, st[0])
        return VectorField.from_array(self.grid, st)


def load(path):
    try:
        with np.load(path, allow_pickle=False) as z:
            missing = [k for k in _KEYS if k not in z.files]
            if missing:
                raise DataError(f"snapshot {path} lacks {', '.join(missing)}")
            d = {k: z[k] for k in z.files}
    except (OSError, ValueError, zipfile.BadZipFile, EOFError) as exc:
        raise DataError(f"cannot read snapshot {path}: {exc}") from exc
    if int(d["format_version"]) != FORMAT_VERSION:
        raise DataError(f"unsupported snapshot format {int(d['format_version'])}")
    K, J, nps, tail, p = (int(v) for v in d["grid_int"])
    L_x, theta_max, Y_max = (float(v) for v in d["grid_real"])
    grid = make_grid(theta_max, J, nps, Y_max, K, L_x, str(d["kind"]), tail, p)
    nodes = d["nodes"][..., 0] + 1j * d["nodes"][..., 1]
    if nodes.shape != grid.family.nodes.shape or not np.array_equal(nodes, grid.family.nodes):
        raise DataError("stored nodes do not match the rebuilt path family")
    s = d["samples"]
    if s.ndim != 5 or s.shape[-1] != 2 or s.shape[-3:-1] != grid.shape:
        raise DataError("sample array has the wrong shape")
    states = s[..., 0] + 1j * s[..., 1]
    label = str(d["label"]) if "label" in d else ""
    return Snapshot(grid, d["times"].astype(float), states, label)


def write_manifest(path, doc):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1, default=_default)
    except OSError as exc:
        raise DataError(f"cannot write manifest {path}: {exc}") from exc
    return path


def _default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x).__name__}")
