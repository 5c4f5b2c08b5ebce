import pytest

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture(scope="session")
def record_criterion(request):
    """Return ``record(number, ok, detail)``; lines are echoed in the terminal summary."""
    lines = request.config.stash[_LINES_KEY]

    def record(number, ok, detail):
        line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
