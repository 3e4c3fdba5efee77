import pytest

from acceptance_report import REPORT


def pytest_terminal_summary(terminalreporter):
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(REPORT):
        ok, name, detail = REPORT[number]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {name} -- {detail}")
