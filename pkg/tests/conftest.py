"""Acceptance bookkeeping: one pass/fail line per criterion at the end of the run."""

import pytest

_RESULTS: dict = {}
_TITLES: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            number, title = mark.args
            _TITLES[number] = title
            _RESULTS.setdefault(number, [])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if not mark:
        return
    number = mark.args[0]
    if report.when == "call" or report.outcome != "passed":
        _RESULTS[number].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        runs = _RESULTS[number]
        if not runs:
            verdict = "NOT RUN"
        elif all(outcome == "passed" for _, outcome in runs):
            verdict = "PASS"
        else:
            verdict = "FAIL"
        failed = [name for name, outcome in runs if outcome != "passed"]
        detail = f"  (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {number:>2}: {verdict:<7} {_TITLES[number]}{detail}")
