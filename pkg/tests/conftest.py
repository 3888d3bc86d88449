import os
import re
import sys

import numpy as np
import pytest

from uptradeoff import _kernels

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_ac(\d+)_", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[n] = (report.outcome, report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        outcome, name = _ACCEPTANCE[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if outcome == 'passed' else 'FAIL'}  ({name})")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests measure steady state."""
    _kernels.entropy_kernel(np.array([0.5, 0.5]))
    _kernels.mutual_information_kernel(np.eye(2) / 2)
    _kernels.waterfill_full(np.array([[0.5, 0.5], [0.2, 0.8]]), 1e-9, 1e-12)
    _kernels.waterfill_public(np.array([0.2, 0.8]), 0.5, np.array([0.5, 0.5]),
                              np.array([-1, 1], dtype=np.int64), 1e-9)
    T = np.array([[1.0, 1.0, 1.0], [-1.0, 0.0, -1.0]])
    _kernels.bland_pivot(T, np.array([1], dtype=np.int64), 2, 1e-11, 1e-11, 10)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
