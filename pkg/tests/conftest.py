import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from multibarrier import BarrierSystem, DispersionModel, dispersion_eval  # noqa: E402

V0 = 10.0
OMEGA = 5.0
ROOT5 = math.sqrt(5.0)


@pytest.fixture
def model():
    return DispersionModel(V0)


@pytest.fixture
def sym(model):
    """Wavevectors at the symmetric point k = chi."""
    return dispersion_eval(model, OMEGA)


@pytest.fixture
def opaque_pair():
    """Two barriers at the documented opaque test point (chi a = 4 sqrt 5)."""
    return BarrierSystem(2, 4.0, 10.0, V0)


def rel(x, y):
    return abs(x - y) / abs(y)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
