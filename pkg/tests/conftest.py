import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qgraph import generators as G

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def unit_star():
    return G.metric_star([1.0, 1.0, 1.0])


@pytest.fixture
def circle_2pi():
    return G.cycle(2 * math.pi)


@pytest.fixture
def p3():
    return G.path(3)


@pytest.fixture(scope="session")
def random_metric_graphs():
    rng = np.random.default_rng(7)
    return [G.random_metric_graph(rng) for _ in range(40)]


@pytest.fixture(scope="session")
def random_multigraphs():
    rng = np.random.default_rng(11)
    out = []
    for _ in range(60):
        V = int(rng.integers(2, 8))
        out.append(G.random_multigraph(rng, V, int(rng.integers(V - 1, 2 * V + 1))))
    return out
