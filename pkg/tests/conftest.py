import numpy as np
import pytest

_LABELS = {}
_RESULTS = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _LABELS[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    label = _LABELS.get(report.nodeid)
    if label is None:
        return
    if report.failed:
        _RESULTS[label] = "FAIL"
    elif report.when == "call" and _RESULTS.get(label) != "FAIL":
        _RESULTS[label] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(f"[{_RESULTS[label]}] {label}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
