import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")

from quasilog.domain import Grid, build_weight  # noqa: E402
from quasilog.solver import DualProblem  # noqa: E402
from quasilog.transform import DualTransform  # noqa: E402

# shared refuge configuration: disk bump of radius 1/4 at the centre of the unit square
REFUGE = dict(b0=1000.0, center=(0.5, 0.5), radius=0.25)


@pytest.fixture(scope="session")
def refuge_problem():
    grid = Grid.rectangle((0, 1), (0, 1), 63)
    weight = build_weight(grid, "disk-bump", **REFUGE)
    return DualProblem(grid, weight, DualTransform(0.1, 4.0))


@pytest.fixture(scope="session")
def line_problem():
    grid = Grid.interval(0, 1, 99)
    return DualProblem(grid, build_weight(grid, "constant", 1.0), DualTransform(1.0, 3.0))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
