"""Collects acceptance verdicts and prints them after the run."""

ACCEPTANCE = []


def record(criterion, label, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  [{criterion}] {label}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
