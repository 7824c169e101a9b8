import pytest

_results = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with (number, ok, detail)."""

    def record(number, ok, detail=""):
        _results[number] = (ok, detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        ok, detail = _results[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
