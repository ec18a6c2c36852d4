import re

_CRITERIA = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    m = re.search(r"test_criterion_(\d+)(\w?)_", report.nodeid)
    if not m:
        return
    label = f"{int(m.group(1))}{m.group(2)}"
    detail = "; ".join(str(v) for k, v in report.user_properties if k == "measured")
    _CRITERIA.append((label, report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, detail in _CRITERIA:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {label:>3}: {status}  {detail}")
