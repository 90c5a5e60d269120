import numpy as np
import pytest

from randrelax._kernels import warm_up

ACCEPTANCE = {}


def pytest_configure(config):
    warm_up()


@pytest.fixture
def report():
    """Record one acceptance line: report(number, passed, detail)."""

    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
