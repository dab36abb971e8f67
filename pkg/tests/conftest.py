import pytest

from diamond_euler.field import make_grid


@pytest.fixture(scope="session")
def grid():
    """Small diamond grid shared by the unit tests."""
    return make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16)


@pytest.fixture(scope="session")
def conoid_grid():
    return make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=16, kind="conoid")


@pytest.fixture(scope="session")
def grid32():
    return make_grid(theta_max=0.5, J=4, nodes_per_segment=32, tail_nodes=128, K=32)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion for the terminal summary."""
    def record(n, ok, detail):
        _CRITERIA[n] = (bool(ok), detail)
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
