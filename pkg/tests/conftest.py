import pytest

from forge.accel import backend
from forge.primes import build_table


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    with backend(request.param):
        yield request.param


@pytest.fixture(scope="session")
def table_1e6():
    return build_table(10**6)


@pytest.fixture(scope="session")
def table_1e7():
    return build_table(10**7)


@pytest.fixture(scope="session")
def table_1e8():
    return build_table(10**8)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::" in rep.nodeid:
                props = dict(rep.user_properties)
                lines.append((props.get("criterion", 0), outcome.upper()[:4], props.get("detail", rep.nodeid)))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n, verdict, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {n:>2}: {verdict}  {detail}")
