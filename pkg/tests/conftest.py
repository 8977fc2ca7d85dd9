import pytest

ACCEPTANCE: dict = {}


@pytest.fixture
def report():
    """Record one acceptance line: report(id, passed, detail)."""
    def _report(key: str, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {key}: {detail}"
        ACCEPTANCE[key] = line
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abcdefgh")), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
