import sys
import numpy as np
import pytest

from intrinsic_holder import BlockStructure, build_group, langevin


@pytest.fixture
def lang():
    return langevin()


@pytest.fixture
def deep():
    """Two-step group with layers (2, 1, 1) and integer blocks."""
    return build_group(BlockStructure((2, 1, 1), ([[1, -1]], [[2]])))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.verdict_lines():
        terminalreporter.write_line(line)
