import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_criteria] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line, then assert it."""

    def report(number: int, ok: bool, detail: str):
        status = "PASS" if ok else "FAIL"
        request.config.stash[_criteria][number] = f"criterion {number}: {status}  {detail}"
        assert ok, detail

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_criteria, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
