# One line per acceptance criterion, collected by tests/test_acceptance.py and
# echoed at the end of the run so that `pytest -v` output carries the verdicts.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
