import pytest

_ACCEPTANCE = []


@pytest.fixture
def acceptance_line(request):
    """Record one pass/fail line for an acceptance criterion."""
    def record(criterion: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append((criterion, ok, detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  {criterion}" + (f"  ({detail})" if detail else ""))
