import sys

import numpy as np
import pytest

from wnl.norms import OptimizerConfig


@pytest.fixture
def cfg():
    return OptimizerConfig(restarts=16)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def pytest_terminal_summary(terminalreporter):
    # acceptance lines are printed during the tests; repeat them here so they survive capture
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
