"""Collects per-criterion outcomes of the acceptance suite and prints one
PASS/FAIL line for each at the end of the run."""

_criteria = {}   # number -> title
_owner = {}      # nodeid -> number
_failed = set()
_seen = set()


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is None:
            continue
        number, title = mark.args
        _criteria[number] = title
        _owner[item.nodeid] = number


def pytest_runtest_logreport(report):
    number = _owner.get(report.nodeid)
    if number is None:
        return
    if report.when == "call" or report.failed:
        _seen.add(number)
    if report.failed:
        _failed.add(number)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        if number in _failed:
            verdict = "FAIL"
        elif number in _seen:
            verdict = "PASS"
        else:
            verdict = "SKIP"
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {_criteria[number]}")
