"""Shared test plumbing: per-criterion summary lines for the acceptance suite."""

ACCEPTANCE_FILE = "test_acceptance.py"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if ACCEPTANCE_FILE not in nodeid:
                continue
            if getattr(rep, "when", "call") != "call" and status != "error":
                continue
            rows.append((nodeid.split("::")[-1], status == "passed"))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in rows:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
