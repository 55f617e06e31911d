from ecgf import acceptance


def pytest_terminal_summary(terminalreporter):
    done = [check() for check in acceptance.CHECKS if check.cache_info().currsize]
    if not done:
        return
    terminalreporter.section("acceptance criteria")
    for result in done:
        terminalreporter.write_line(result.line())
    if len(done) == len(acceptance.CHECKS):
        terminalreporter.write_line(acceptance.timing_result(done).line())
