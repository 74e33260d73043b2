import contextlib
import sys
import time
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

_RESULTS: dict[int, tuple[str, str, float]] = {}


@contextlib.contextmanager
def criterion(number: int, title: str, budget: float):
    """Time a block, enforce its runtime budget, and record a pass/fail line."""
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        _RESULTS[number] = ("FAIL", title, time.perf_counter() - t0)
        raise
    dt = time.perf_counter() - t0
    if dt >= budget:
        _RESULTS[number] = ("FAIL", f"{title} (over {budget:g} s budget)", dt)
        pytest.fail(f"criterion {number} took {dt:.2f} s, budget {budget:g} s")
    _RESULTS[number] = ("PASS", title, dt)


@pytest.fixture
def acceptance():
    return criterion


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, title, dt = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}  [{dt:.2f} s]")
