import pytest

from fourws.vehicle_model import VehicleParams


@pytest.fixture
def params():
    return VehicleParams(2.7, 1.35)


ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    """Store one acceptance line; shown in the terminal summary."""
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
