import pytest
from hypothesis import HealthCheck, settings

from semigeneric.core import build
from semigeneric.instances import small_instances
from semigeneric.star import enumerate_expansions

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Two perp-pairs {0, 1} and {2, 3}: the three configurations up to isomorphism.
FIG_LEFT = [[0, 2], [0, 3], [1, 2], [1, 3]]
FIG_MIDDLE = [[0, 2], [0, 3], [2, 1], [3, 1]]
FIG_RIGHT = [[0, 3], [1, 2], [2, 0], [3, 1]]


@pytest.fixture
def fig_left():
    return build(range(4), FIG_LEFT)


@pytest.fixture
def fig_middle():
    return build(range(4), FIG_MIDDLE)


@pytest.fixture
def fig_right():
    return build(range(4), FIG_RIGHT)


@pytest.fixture(scope="session")
def corpus():
    """Every member of S with at most 6 vertices and 3 columns, up to
    isomorphism, with its expansions."""
    return [(g, enumerate_expansions(g)) for g in small_instances(6, 3)]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
