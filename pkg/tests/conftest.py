import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dlab.spectral_core import Field, Grid1D

settings.register_profile(
    "ci", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("ci")

SUITE_LIMIT_S = 600.0
_lines: list[str] = []
_start = time.perf_counter()


@pytest.fixture
def report():
    """Record one acceptance line: report(number, title, passed, detail)."""

    def _record(number: int, title: str, passed: bool, detail: str) -> bool:
        _lines.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} | {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _start
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
    ok = elapsed < SUITE_LIMIT_S
    terminalreporter.write_line(
        f"[{'PASS' if ok else 'FAIL'}] suite runtime {elapsed:.1f} s (limit {SUITE_LIMIT_S:.0f} s)"
    )


def pytest_sessionfinish(session, exitstatus):
    if time.perf_counter() - _start >= SUITE_LIMIT_S and exitstatus == 0:
        session.exitstatus = 1


def gaussian(grid: Grid1D, amp: float = 1.0, width: float = 1.0, center: float = 0.0, real: bool = False) -> Field:
    return Field(grid, amp * np.exp(-(((grid.x - center) / width) ** 2)) + 0j, real=real)
