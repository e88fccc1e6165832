import time

import pytest

SUITE_BUDGET_S = 300.0
_ACCEPTANCE: list[str] = []
_START = time.perf_counter()


@pytest.fixture
def acceptance_line():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(num: int, ok: bool, detail: str) -> None:
        line = f"C{num:<2d} {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _START
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s[1:3])):
            terminalreporter.write_line(line)
    terminalreporter.write_line(f"suite wall time {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _START
    if elapsed > SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
