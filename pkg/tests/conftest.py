import numpy as np
import pytest

from breakmin import HAAssignment, build_mdrrt, extract_meetings, generate_srrt, table_one

from oracle import TABLE2_Y


@pytest.fixture
def table1():
    return table_one()


@pytest.fixture
def table1_meetings(table1):
    return extract_meetings(table1)


@pytest.fixture
def table2():
    return HAAssignment(np.array(TABLE2_Y))


def instance(n: int, seed: int):
    """Shuffled MDRRT used across the test modules."""
    return build_mdrrt(generate_srrt(n), seed)


# -- acceptance reporting --------------------------------------------------------

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[marker] = report.outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        report.acceptance = m.args


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), outcome in sorted(_ACCEPTANCE.items()):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {status}  {title}")
