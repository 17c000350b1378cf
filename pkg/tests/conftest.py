import pytest

from pateleak.noise import gaussian_model, laplace_model

ACCEPTANCE_LINES = []


@pytest.fixture
def lap01():
    return laplace_model(0.1)


@pytest.fixture
def gauss5():
    return gaussian_model(5.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
