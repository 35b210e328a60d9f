"""Collects the per-criterion lines written by the acceptance tests."""

ACCEPTANCE = {}


def pytest_runtest_makereport(item, call):
    num = getattr(item.function, "criterion", None)
    if num is not None and call.when == "call" and call.excinfo is not None and num not in ACCEPTANCE:
        ACCEPTANCE[num] = f"criterion {num}: FAIL ({call.excinfo.typename}: {call.excinfo.value})"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])
