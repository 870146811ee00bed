import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from centralspins.model import ModelParams

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Collects one PASS/FAIL line per acceptance criterion for the summary."""
    lines = request.config.stash[_LINES_KEY]

    def log(line):
        lines.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def fig2_params():
    return ModelParams(2.0, 1.9, 2.5, 1.1, 1.2, 2.6, 2.5, 100, 100, 1.0)


@pytest.fixture
def small_params():
    return ModelParams(2.0, 1.9, 2.5, 1.1, 1.2, 2.6, 2.5, 4, 4, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
