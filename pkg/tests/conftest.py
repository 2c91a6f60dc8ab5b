import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion; call with (key, ok, detail)."""
    def record(key, ok, detail=""):
        ACCEPTANCE_LINES[key] = f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}"
        print(ACCEPTANCE_LINES[key])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (len(k), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
