from collections import defaultdict

import pytest

_outcomes: dict = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[mark.args].append((item.name, rep.passed, rep.skipped))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for (cid, text), runs in sorted(_outcomes.items(), key=lambda kv: int(kv[0][0])):
        failed = [name for name, ok, skipped in runs if not ok and not skipped]
        status = "FAIL" if failed else "PASS"
        line = f"{status} C{cid} {text}"
        if failed:
            line += "  (failing: " + ", ".join(failed) + ")"
        tr.write_line(line)
