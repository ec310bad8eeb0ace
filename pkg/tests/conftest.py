import numpy as np
import pytest

from zoda._backend import available_backends
from zoda.rng import RngState

BACKENDS = available_backends()


@pytest.fixture(params=BACKENDS, ids=[m.NAME for m in BACKENDS])
def kernel_module(request):
    return request.param


@pytest.fixture
def rng():
    return RngState(987654321)


def mean_se(v):
    v = np.asarray(v, dtype=np.float64)
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.shape[0]))


ACCEPTANCE_LINES = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
