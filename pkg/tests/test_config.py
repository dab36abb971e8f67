import math

import pytest

from diamond_euler.config import SCHEMA, describe, load_config, parse_lines
from diamond_euler.errors import DataError, ParameterError


def test_defaults_validate():
    cfg = load_config()
    assert cfg["space.a"] == 0.5 and cfg["space.m"] == 3
    assert set(cfg) == set(SCHEMA)


def test_file_and_overrides(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\ngrid.K = 32   # trailing\nsolver.beta = auto\n"
                 "solver.eps_schedule = (0.2, 0.1)\ndatum.params = {'amplitude': 2.0}\n")
    cfg = load_config(str(p), ["grid.K=16", "space.theta0 = 0.3"])
    assert cfg["grid.K"] == 16
    assert cfg["solver.beta"] == "auto"
    assert cfg["solver.eps_schedule"] == (0.2, 0.1)
    assert cfg["datum.params"] == {"amplitude": 2.0}
    assert cfg["space.theta0"] == 0.3


@pytest.mark.parametrize("line", ["grid.K = 1.5", "nope = 1", "grid.K", "space.gamma = 2",
                                  "solver.eps_schedule = (0.1, 0.2)", "grid.kind = wedge",
                                  "space.theta0 = 0.9"])
def test_rejected(line):
    with pytest.raises(ParameterError):
        load_config(None, [line])


def test_missing_file():
    with pytest.raises(DataError):
        load_config("/nonexistent/run.cfg")


def test_describe_lists_every_key():
    text = describe()
    assert all(k in text for k in SCHEMA)
    assert parse_lines(["grid.L_x = 6.283185307179586"])["grid.L_x"] == pytest.approx(2 * math.pi)
