import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from dlab.core import FiniteSystem, cycle_system


@st.composite
def systems(draw, max_n=8, min_n=1):
    n = draw(st.integers(min_n, max_n))
    perm = draw(st.permutations(list(range(n))))
    return FiniteSystem(tuple(perm))


@pytest.fixture
def c2():
    return cycle_system(2)


@pytest.fixture
def c3():
    return cycle_system(3)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
