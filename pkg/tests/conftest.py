import sys

import pytest

from powmod.arith import build_sieve


@pytest.fixture(scope="session")
def sieve():
    return build_sieve(10**5)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", [])
    if results:
        terminalreporter.section("acceptance criteria")
        for r in sorted(results, key=lambda r: r.number):
            terminalreporter.write_line(r.line())
