import numpy as np
import pytest

from lefi import ComputeModel, CavProfile, Scenario

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    n, title = marker
    prev = _CRITERIA.get(n, (title, "PASS"))
    if report.when == "call" or report.outcome != "passed":
        outcome = "PASS" if report.outcome == "passed" and prev[1] == "PASS" else "FAIL"
        _CRITERIA[n] = (title, outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("criterion")
    if m is not None:
        outcome.get_result().criterion = m.args


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, outcome = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {outcome}: {title}")


@pytest.fixture
def cm():
    return ComputeModel()


@pytest.fixture
def profile():
    return CavProfile(id=0, beta=1.0, theta=0.1, capacity_f=28.9, pi=0.5)


@pytest.fixture
def small_scenario():
    return Scenario(n_cavs=4, rounds=8)


def random_profile(rng, **overrides):
    kw = dict(
        id=0,
        beta=float(rng.uniform(0.05, 2.0)),
        theta=float(rng.uniform(0.0, 0.5)),
        capacity_f=float(rng.uniform(5.0, 50.0)),
        pi=float(rng.uniform(0.0, 1.0)),
        d_min=0.0,
        d_max=float(rng.uniform(1.0, 20.0)),
        t_max=float(rng.uniform(20.0, 300.0)),
    )
    kw.update(overrides)
    return CavProfile(**kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
