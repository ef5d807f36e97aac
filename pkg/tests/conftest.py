from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record the PASS/FAIL line of an acceptance criterion."""
    def record(number: int, passed: bool, note: str = ""):
        _CRITERIA[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}" + (f" ({note})" if note else "")
        print(_CRITERIA[number])
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
