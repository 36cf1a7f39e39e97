import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repeatable",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repeatable")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay acceptance verdict lines outside the captured test output."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def unit_grid():
    """[0,1] split into 8 equal cells, the workhorse fixture."""
    from l1lab.grid_space import Partition

    return Partition.dyadic(3)


@pytest.fixture
def two_window():
    from l1lab.grid_space import Partition

    return Partition((np.array([0.25, 0.25, 0.5]), np.array([0.4, 0.6])))
