import numpy as np
import pytest

from wealthshare.data import WeightedSample


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_sample():
    return WeightedSample([1.0, 2.0, 3.0], [1.0, 1.0, 1.0])


def rel(a, b):
    return abs(a - b) / abs(b)


# acceptance lines collected by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE = []


def record(name, ok, detail):
    ACCEPTANCE.append((name, bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
