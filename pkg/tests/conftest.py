import time

import pytest

from cwblowup.driver import compare_damping, run
from cwblowup.mesh import MeshControl
from cwblowup.problem import PDEParams, build_sine_profile

DEFAULT_PARAMS = PDEParams(p=3.0, q=1.3)

_criteria: dict[str, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion."""

    def record(cid: str, ok: bool, detail: str) -> bool:
        _criteria.setdefault(cid, []).append((bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: int(c[1:])):
        for ok, detail in _criteria[cid]:
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid}: {detail}")


@pytest.fixture(scope="session")
def control():
    return MeshControl()


@pytest.fixture(scope="session")
def timed_blowup(control):
    start = time.perf_counter()
    result = run(build_sine_profile(1000.0), DEFAULT_PARAMS, control, snapshot_every=50)
    return result, time.perf_counter() - start


@pytest.fixture(scope="session")
def blowup_run(timed_blowup):
    return timed_blowup[0]


@pytest.fixture(scope="session")
def decay_run(control):
    return run(build_sine_profile(1.0), DEFAULT_PARAMS, control)


@pytest.fixture(scope="session")
def damping(control):
    return compare_damping(build_sine_profile(1000.0), DEFAULT_PARAMS, control)
