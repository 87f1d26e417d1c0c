import pytest

_LINES: list[str] = []


@pytest.fixture
def detail(request):
    """Mutable list a test appends human-readable measurements to."""
    notes: list[str] = []
    request.node.acceptance_notes = notes
    return notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    status = "PASS" if report.passed else "FAIL"
    notes = "; ".join(getattr(item, "acceptance_notes", []))
    line = f"{status}  {marker.args[0]}" + (f"  [{notes}]" if notes else "")
    _LINES.append(line)
    print("\n" + line)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
