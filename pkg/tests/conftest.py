import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """Context manager recording one acceptance criterion as pass or fail."""
    results = request.config.stash[_RESULTS]

    @contextmanager
    def run(number, title):
        detail = {}
        t0 = time.perf_counter()
        ok = False
        try:
            yield detail
            ok = True
        finally:
            info = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in detail.items())
            line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  [{time.perf_counter() - t0:.1f} s] {info}"
            results.append((number, line))
            print(line)

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(results):
        terminalreporter.write_line(line)
