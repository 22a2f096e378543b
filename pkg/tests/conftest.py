"""Shared test plumbing: the acceptance criteria summary table.

Acceptance tests register one line per criterion; the table is printed in
the terminal summary so every run ends with an explicit pass/fail line for
each criterion, including its measured value and stated tolerance.
"""

_CRITERIA: list = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    _CRITERIA.append((name, ok, detail))
    assert ok, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    width = max(len(name) for name, _, _ in _CRITERIA)
    for name, ok, detail in _CRITERIA:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {name:<{width}}  {detail}")
