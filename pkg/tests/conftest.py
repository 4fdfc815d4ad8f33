"""Collects acceptance outcomes and prints one line per criterion at the end."""
import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.skipped or rep.failed):
        return
    n = marker.args[0]
    detail = dict(item.user_properties).get("detail", "")
    if rep.skipped:
        status = "SKIP"
        if not detail and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
    else:
        status = "PASS" if rep.passed else "FAIL"
    _RESULTS[n] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")
