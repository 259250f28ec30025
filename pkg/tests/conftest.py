import numpy as np
import pytest

from objbayes.families import make_builtin

# parameter points spread over each built-in family's parameter space
POINTS = {
    "normal_known_sigma": [-50.0, -1.0, 0.0, 2.5, 40.0],
    "normal": [(0.0, 1.0), (-3.0, 0.2), (5.0, 4.0), (1.0, 0.05), (-20.0, 30.0)],
    "poisson": [0.01, 0.5, 2.0, 10.0, 150.0],
    "bernoulli": [0.01, 0.1, 0.5, 0.8, 0.99],
    "binomial": [0.01, 0.25, 0.5, 0.7, 0.99],
    "exponential": [0.01, 0.3, 1.0, 4.0, 100.0],
}

FIXED = {"normal_known_sigma": {"sigma": 1.5}, "binomial": {"trials": 7}}


def builtin(name):
    return make_builtin(name, FIXED.get(name, {}))


@pytest.fixture(params=sorted(POINTS))
def family_name(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one pass/fail line per acceptance criterion in the terminal summary
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA[number] = (title, report.passed, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, duration = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title} ({duration:.2f} s)")
