import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(tag, ok, detail)."""
    def record(tag, ok, detail):
        status = "PASS" if ok is True else ("FAIL" if ok is False else "INFO")
        line = f"[{status}] {tag}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
