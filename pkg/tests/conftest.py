"""Shared pytest plumbing.

The acceptance tests record one ``ACCEPTANCE <n> <name>: PASS (...)``
line per verified criterion. They are printed here, in the terminal
summary after capture is torn down, so the measured numbers land in the
terminal (and in any tee'd log) even under file-descriptor capture.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
