import pytest

from roma_hsr.geometry import SPEED_OF_LIGHT, ArrayConfig, Scenario

BASE_CENTER = (30.0, 4.0, 10.0)
CARRIER = 20e9
LAMBDA = SPEED_OF_LIGHT / CARRIER
TRAIN_SPEED = 350 / 3.6

_ACCEPTANCE = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    _ACCEPTANCE.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


@pytest.fixture
def base_scenario():
    """4x4 panels at one-wavelength spacing, receiver at (30, 4, 10) m."""
    array = ArrayConfig.square(4, LAMBDA)
    return Scenario(array, array, rx_center=BASE_CENTER, velocity=(TRAIN_SPEED, 0.0, 0.0),
                    carrier_hz=CARRIER)
