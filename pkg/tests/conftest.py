import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from ttef.domains import DomainStore
from ttef.model import Instance

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def make(durations, usages, capacity, windows=None, precedences=(), horizon=None):
    """Instance plus a fresh store over its initial windows."""
    inst = Instance.build(durations, usages, capacity, precedences, windows, horizon)
    return inst, DomainStore(inst.est0, inst.lst0)


@pytest.fixture
def three_tight():
    """Three p=2, r=1 activities in [0, 4) on capacity 1; no compulsory parts."""
    return make([2, 2, 2], [1, 1, 1], 1, [(0, 2)] * 3)


@pytest.fixture
def lb_push():
    """``a`` has compulsory part [1, 2); ``u`` needs to move right to 2."""
    return make([2, 2], [2, 2], 2, [(0, 1), (0, 8)])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.LINES):
            terminalreporter.write_line(line)
