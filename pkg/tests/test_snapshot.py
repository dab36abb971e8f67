import numpy as np
import pytest

from diamond_euler import snapshot
from diamond_euler.catalog import from_formula
from diamond_euler.errors import DataError


def test_vector_round_trip_is_bit_exact(grid, tmp_path):
    w = from_formula("random_stream", grid)
    path = snapshot.save(tmp_path / "w.npz", w, label="test")
    snap = snapshot.load(path)
    assert snap.grid is grid
    assert snap.label == "test"
    assert np.array_equal(snap.field().stack(), w.stack())


def test_time_series_round_trip(grid, tmp_path):
    w = from_formula("wave_packet", grid).stack()
    states = np.stack([w, 2 * w, 3 * w])
    times = np.array([0.0, 0.1, 0.2])
    snapshot.save(tmp_path / "s.npz", grid=grid, times=times, states=states)
    snap = snapshot.load(tmp_path / "s.npz")
    assert np.array_equal(snap.states, states)
    assert np.array_equal(snap.times, times)


def test_scalar_round_trip_and_layout(grid, tmp_path):
    f = from_formula("scalar_packet", grid)
    snapshot.save(tmp_path / "f.npz", f)
    with np.load(tmp_path / "f.npz") as z:
        assert z["samples"].dtype == np.dtype("<f8")
        assert z["samples"].shape == (1, 1) + grid.shape + (2,)
        assert int(z["format_version"]) == snapshot.FORMAT_VERSION
    assert np.array_equal(snapshot.load(tmp_path / "f.npz").field().samples, f.samples)


def test_bad_files(grid, tmp_path):
    bad = tmp_path / "bad.npz"
    bad.write_bytes(b"not a zip")
    with pytest.raises(DataError):
        snapshot.load(bad)
    with pytest.raises(DataError):
        snapshot.load(tmp_path / "missing.npz")
    np.savez(tmp_path / "partial.npz", format_version=np.array(1))
    with pytest.raises(DataError):
        snapshot.load(tmp_path / "partial.npz")
    with pytest.raises(DataError):
        snapshot.save(tmp_path / "x.npz", grid=grid, times=[0.0], states=np.zeros((2, 2) + grid.shape))
