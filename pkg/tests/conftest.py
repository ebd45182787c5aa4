def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    order = sorted(results, key=lambda k: (int(str(k).rstrip("ab")), str(k)))
    for key in order:
        terminalreporter.write_line(results[key])
