import pytest

from morphspread import P1 as _P1, P2 as _P2, pde

ACCEPTANCE_LINES = []

# the desk-scale front run: L = 400, dx = 0.1, t_end = 200
DESK_GRID = pde.Grid1D(400.0, 4001)
DESK_CFG = pde.SimConfig(t_end=200.0)


@pytest.fixture
def P1():
    return _P1


@pytest.fixture
def P2():
    return _P2


@pytest.fixture(scope="session")
def p1_run():
    """(report, final_state, trace) of the desk-scale P1 run."""
    return pde.verify_linear_determinacy(_P1, DESK_GRID, DESK_CFG, return_run=True)


@pytest.fixture(scope="session")
def p1_half_run():
    # dx halved; dt drops fourfold, so the stride keeps the sample times
    grid = pde.Grid1D.from_spacing(400.0, 0.05)
    cfg = pde.SimConfig(t_end=200.0, sample_stride=4 * DESK_CFG.sample_stride)
    return pde.verify_linear_determinacy(_P1, grid, cfg)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
