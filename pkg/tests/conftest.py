import pytest

_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance criterion outcome; the summary prints them in order."""

    def _report(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, bool(passed), detail))
        return bool(passed)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} | {detail}")
