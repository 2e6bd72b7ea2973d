"""Shared pytest plumbing.

The acceptance tests record one verdict line each; showing them in the
terminal summary keeps them visible even under output capture.
"""

from __future__ import annotations

ACCEPTANCE_VERDICTS: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
