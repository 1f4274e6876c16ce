import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from swellflow import SpeciesSpec, make_preset
from swellflow.state import WATER

settings.register_profile("swellflow", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("swellflow")

UREA = SpeciesSpec("urea", 0.060056, 1320.0)


@pytest.fixture
def p1():
    return make_preset("P1")


@pytest.fixture
def p2():
    return make_preset("P2")


@pytest.fixture
def p3():
    return make_preset("P3")


@pytest.fixture
def p3_urea():
    return make_preset("P3", species=(UREA, WATER))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
