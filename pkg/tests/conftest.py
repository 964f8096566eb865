import numpy as np
import pytest

from freudspline import FreudWeight, make_config


@pytest.fixture
def gauss_weight():
    return FreudWeight(2.0, 0.5)


@pytest.fixture
def cfg2():
    return make_config(ell=2)


@pytest.fixture
def cfg1():
    return make_config(ell=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---- acceptance summary: one line per criterion in the terminal report ----

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and not detail:
        detail = str(rep.longrepr).strip().splitlines()[-1][:160]
    _CRITERIA[mark.args[0]] = (rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
