"""Shared test plumbing.

The acceptance suite records one line per criterion; the terminal summary
hook prints them together at the end of the run so the verdict survives
output capturing.
"""
import pytest

_acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _acceptance_lines.append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
