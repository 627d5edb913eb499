import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record an acceptance line, then assert it: ``criterion(n, ok, detail)``."""

    def record(n, ok, detail=""):
        _CRITERIA[n] = (bool(ok), detail)
        assert ok, f"criterion {n} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
