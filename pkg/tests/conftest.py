"""Collects acceptance-criterion outcomes and prints one PASS/FAIL line each."""
import collections

import pytest

_RESULTS = collections.defaultdict(list)
_TITLES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number, title = marker.args
        _TITLES[number] = title
        # an expected failure is still a failed claim for the criterion line
        ok = report.passed and not hasattr(report, "wasxfail")
        _RESULTS[number].append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        checks = _RESULTS[number]
        failed = [name for name, ok in checks if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {number:>2} {status}: {_TITLES[number]} ({len(checks) - len(failed)}/{len(checks)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
