"""Shared pytest hooks.

Collects the acceptance gate's per-criterion report lines and echoes them in
the terminal summary, so they show up even when output capture is on and the
tests pass.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
