import numpy as np
import pytest

from coneinf.catalog import build_example_1, build_example_2
from coneinf.hilbert import standard_normal


@pytest.fixture(scope="session")
def ex1():
    return build_example_1(1.0)


@pytest.fixture(scope="session")
def ex2():
    return build_example_2(1.0)


@pytest.fixture(scope="session")
def P():
    return standard_normal()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one ``PASS``/``FAIL`` line per acceptance criterion."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
