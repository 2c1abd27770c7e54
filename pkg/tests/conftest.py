import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cmcsurf import GridChart, cylinder, instanton, parse_rational  # noqa: E402

ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cyl_chart():
    return GridChart.square(0.0, 3.0, 65)


@pytest.fixture(scope="session")
def cyl(cyl_chart):
    return cylinder(1.0, cyl_chart)


@pytest.fixture(scope="session")
def inst_chart():
    return GridChart.square(-2.0, 2.0, 65)


@pytest.fixture(scope="session")
def inst(inst_chart):
    return instanton(parse_rational("z"), inst_chart)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
