"""Shared test plumbing: collects acceptance lines for the run summary."""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion and enforce it."""

    def _record(number: int, title: str, passed: bool, details: str) -> None:
        verdict = "PASS" if passed else "FAIL"
        line = f"ACCEPTANCE {number} {title}: {verdict} ({details})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
