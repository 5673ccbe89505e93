import pytest

CRITERIA: dict[int, str] = {}


@pytest.fixture
def report_criterion(capsys):
    """Record and print the one-line verdict of an acceptance criterion."""

    def record(k: int, passed: bool, detail: str) -> None:
        line = f"CRITERION {k}: {'PASS' if passed else 'FAIL'} {detail}"
        CRITERIA[k] = line
        with capsys.disabled():
            print("\n" + line)

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
