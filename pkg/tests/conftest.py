import numpy as np
import pytest
from hypothesis import strategies as st

from hypergrowth.models import HyperbolicModel, ModulatedHyperbolicModel
from hypergrowth.series import Quantity, TimeSeries

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def hyperbolas(draw):
    """Hyperbola whose singularity lies between t=10 and t=3000."""
    a = draw(st.floats(1e-3, 10.0))
    sing = draw(st.floats(10.0, 3000.0))
    return HyperbolicModel(a, a / sing)


def series_from(model, t, region="synthetic", quantity=Quantity.GDP_PER_CAPITA, scale=1.0):
    t = np.asarray(t, dtype=float)
    return TimeSeries.from_points(zip(t, scale * np.asarray(model(t))), region, quantity)


@pytest.fixture
def demo_trio():
    return (
        ModulatedHyperbolicModel.from_lines(1.0, 0.0025, 1.0, 1 / 180),
        ModulatedHyperbolicModel.from_lines(1.01, 0.002, 1.0, 1 / 181),
        ModulatedHyperbolicModel.from_lines(0.99, 1 / 300, 1.0, 1 / 182),
    )
