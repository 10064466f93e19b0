import pytest

_LINES = []


@pytest.fixture
def report():
    """Record a one-line verdict that is echoed and repeated in the summary."""
    def emit(line: str):
        print(line)
        _LINES.append(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
