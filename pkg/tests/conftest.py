import re

_AC = re.compile(r"test_ac(\d+)_")
_results: dict[int, list[str]] = {}


def pytest_runtest_logreport(report):
    m = _AC.search(report.nodeid)
    if not m or (report.when != "call" and report.passed):
        return
    _results.setdefault(int(m.group(1)), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        ok = all(o == "passed" for o in _results[k])
        terminalreporter.write_line(f"AC{k}: {'PASS' if ok else 'FAIL'}")
