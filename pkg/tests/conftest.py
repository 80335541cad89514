from pathlib import Path

import pytest
from hypothesis import settings

from mca import zoo

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def c6():
    return zoo.cyclic6()


@pytest.fixture
def wx():
    return zoo.wxyz()


# -- acceptance report -------------------------------------------------------------

_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, [title, True, ""])
    if rep.failed:
        entry[1] = False
        entry[2] = entry[2] or rep.when
    elif rep.skipped and rep.when != "teardown":
        entry[1] = False
        entry[2] = "skipped"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, why = _CRITERIA[n]
        status = "PASS" if ok else "FAIL"
        extra = f" ({why})" if why and not ok else ""
        terminalreporter.write_line(f"criterion {n:2d} {status}: {title}{extra}")
