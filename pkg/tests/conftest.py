import numpy as np
import pytest
from hypothesis import settings

from nhqw import available_backends, use_backend

settings.register_profile("deterministic", derandomize=True, print_blob=True)
settings.load_profile("deterministic")


@pytest.fixture(params=available_backends())
def backend(request):
    """Run the test once per importable kernel backend."""
    with use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance report ------------------------------------------------------------

ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None or report.when != "call":
        return
    ok = report.passed and not hasattr(report, "wasxfail")
    ACCEPTANCE.setdefault(crit, []).append((ok, report.nodeid.split("::")[-1]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[crit]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        failed = [name for ok, name in parts if not ok]
        detail = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {crit:2d}: {status}{detail}")
