import pytest

from exlab import curves


@pytest.fixture(scope="session", autouse=True)
def hasse_gate():
    """Every trace computed anywhere in the run must satisfy ap^2 <= 4p."""
    yield
    audit = curves.HASSE_AUDIT
    assert audit.violations == 0, f"{audit.violations} Hasse violations"


@pytest.fixture
def E11():
    return curves.CORPUS["11a3"]


@pytest.fixture
def fresh_cache():
    return curves.TraceCache()


# one PASS/FAIL line per acceptance criterion, printed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
