import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail=""):
        _ACCEPTANCE.append((number, request.node.name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted({r[0] for r in _ACCEPTANCE}):
        parts = [r for r in _ACCEPTANCE if r[0] == number]
        mark = "PASS" if all(r[2] for r in parts) else "FAIL"
        detail = "; ".join(f"{'ok' if r[2] else 'FAILED'} {r[1]}: {r[3]}" for r in parts)
        terminalreporter.write_line(f"[{mark}] criterion {number:>2}: {detail}")
