import numpy as np
import pytest

from givenstour.tour import random_frame

ACCEPTANCE_RESULTS = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def frame_pair(rng):
    def make(p, d):
        return random_frame(p, d, rng), random_frame(p, d, rng)

    return make


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion and assert it."""

    def record(criterion, ok, detail=""):
        ACCEPTANCE_RESULTS.append((criterion, bool(ok), detail))
        assert ok, f"criterion {criterion} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}")
