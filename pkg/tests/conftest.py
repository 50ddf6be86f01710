import numpy as np
import pytest

from ehsched import presets
from ehsched.curves import PiecewiseCurve, Poly, Step
from ehsched.multihop import Scenario
from ehsched.rate import shannon

# criterion id -> list of (test name, passed, detail)
_ACCEPTANCE: dict[str, list[tuple[str, bool, str]]] = {}


def cubic_energy_scenario(T: float = 1.0) -> Scenario:
    """Single hop, E(t) = 5(t-1)^3 + 5, everything buffered at t = 0."""
    energy = PiecewiseCurve([Poly(5.0, 3.0, 1.0, 5.0)], T)
    return Scenario((energy,), PiecewiseCurve.buffered(1e6, T), (shannon(),), T)


def step_scenario() -> Scenario:
    """Two hops with staircase energy and data, horizon 3 s."""
    T = 3.0
    es = PiecewiseCurve([Step(1.0, 0.0), Step(2.0, 1.0), Step(0.5, 2.0)], T)
    er = PiecewiseCurve([Step(0.5, 0.0), Step(1.5, 1.5)], T)
    b = PiecewiseCurve([Step(1.0, 0.0), Step(2.0, 0.5), Step(1.0, 2.5)], T)
    return Scenario((es, er), b, (shannon(), shannon()), T)


@pytest.fixture(scope="session")
def cubic_energy():
    return cubic_energy_scenario()


@pytest.fixture(scope="session")
def step_sc():
    return step_scenario()


@pytest.fixture
def rate():
    return shannon()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def ex1():
    return presets.ex1().scenario


@pytest.fixture(scope="session")
def ex2():
    return presets.ex2().scenario


@pytest.fixture(scope="session")
def ex3():
    return presets.ex3().scenario


@pytest.fixture
def criterion(request):
    """Record a detail line for the acceptance summary: ``criterion("D = 2.88")``."""
    marker = request.node.get_closest_marker("acceptance")
    cid = str(marker.args[0]) if marker else "?"
    details: list[str] = []
    request.node._acceptance = (cid, details)
    return details.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        cid = str(marker.args[0])
        _, details = getattr(item, "_acceptance", (cid, []))
        _ACCEPTANCE.setdefault(cid, []).append((item.name, rep.passed, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda c: (len(c), c)):
        rows = _ACCEPTANCE[cid]
        ok = all(passed for _, passed, _ in rows)
        tr.write_line(f"criterion {cid}: {'PASS' if ok else 'FAIL'} ({sum(p for _, p, _ in rows)}/{len(rows)} checks)")
        for name, passed, detail in rows:
            tr.write_line(f"    [{'pass' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
