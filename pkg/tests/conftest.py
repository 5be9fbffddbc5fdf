import warnings

import pytest

from snailopto.circuit import SnailParams
from snailopto.effective import HybridParams

DEVICE_EC = 35e6
DEVICE_EJ_SMALL = 47.5e9
DEVICE_EJ_LARGE = 163.5e9


@pytest.fixture
def device_snail():
    return SnailParams(ej_large=DEVICE_EJ_LARGE, ej_small=DEVICE_EJ_SMALL, ec=DEVICE_EC)


@pytest.fixture
def device_hybrid():
    return HybridParams(g=6.4e6, omega_s=785.25e6, kappa_ex=17e6, kappa_in=3e6, gamma=4.4e3, gamma_ex=0.6e3)


def quiet_snail(ej_large, ej_small, ec):
    """SnailParams without the transmon-limit warning, for low-ratio test cases."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SnailParams(ej_large, ej_small, ec)


# acceptance criteria register their one-line verdicts here
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
