import numpy as np
import pytest

# acceptance verdicts, filled by tests/test_acceptance.py and echoed at the end of the run
CRITERIA: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[key])
