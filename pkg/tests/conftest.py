"""Shared pytest wiring: one verdict line per acceptance criterion.

Each test in test_acceptance.py is one shipping criterion; the summary
prints PASS/FAIL per criterion so a green run reads as a checklist.
Tests can attach a short note (measurements, counts) to their line via
ACCEPTANCE_NOTES[test name].
"""

ACCEPTANCE_NOTES: dict[str, str] = {}

_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    path = report.nodeid.split("::")[0]
    if not path.endswith("test_acceptance.py"):
        return
    _results.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _results:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        line = f"[acceptance] {name}: {verdict}"
        note = ACCEPTANCE_NOTES.get(name)
        if note:
            line += f"  ({note})"
        terminalreporter.write_line(line)
