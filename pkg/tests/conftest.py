from hypothesis import settings

settings.register_profile("artifact", deadline=None, max_examples=40)
settings.load_profile("artifact")

# (criterion number, passed, detail), filled by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
