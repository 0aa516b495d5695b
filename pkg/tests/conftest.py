import pytest

# One line per acceptance criterion, echoed after the run so the pass/fail
# status of each is visible even when pytest captures stdout.
_CRITERION_LINES = []


@pytest.fixture(scope="session")
def criterion_log():
    return _CRITERION_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
