import pytest

from lifecycle_agents.calibration import published_calibration


@pytest.fixture
def calibration():
    return published_calibration()


@pytest.fixture
def prefs(calibration):
    return calibration.preferences()


@pytest.fixture
def env(calibration):
    return calibration.environment()


# --- acceptance summary ---------------------------------------------------------
# Tests marked with @pytest.mark.criterion(number, title) roll up into one
# PASS/FAIL line per criterion, printed after the run.

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "failed": []})
    if rep.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"{status} criterion {number}: {entry['title']}"
        if entry["failed"]:
            line += f" (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
