import math
import warnings

import pytest
from hypothesis import HealthCheck, settings

from paramp.model import AmplifierModel, ModeParams

TWO_PI = 2.0 * math.pi

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE = []


def paper_ndpa(kappa_c_hz=600e6, g_hz=1e5):
    """10 GHz / 7 GHz modes, 100 MHz linewidths, 600 MHz pump, g3/2pi = 100 kHz."""
    return AmplifierModel(
        "non-degenerate",
        ModeParams.from_hz(10e9, 100e6),
        ModeParams.from_hz(17e9, kappa_c_hz),
        TWO_PI * g_hz,
        idler=ModeParams.from_hz(7e9, 100e6),
    )


def paper_dpa(kappa_c_hz=600e6, g_hz=1e5):
    return AmplifierModel(
        "degenerate", ModeParams.from_hz(10e9, 100e6), ModeParams.from_hz(20e9, kappa_c_hz), TWO_PI * g_hz
    )


def quiet_model(*args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return AmplifierModel(*args, **kw)


@pytest.fixture(scope="session")
def ndpa():
    return paper_ndpa()


@pytest.fixture(scope="session")
def dpa():
    return paper_dpa()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
