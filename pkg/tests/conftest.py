import numpy as np
import pytest

from fsvd.core import AtomicMeasure, BandSet, TorusInterval, moments_from_measure

MASTER_SEED = 20240531


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running SDP solves (N=64 ensembles)")


@pytest.fixture
def rng():
    return np.random.default_rng(MASTER_SEED)


@pytest.fixture
def mu1():
    return AtomicMeasure.from_arrays([0.7, 2.0, 1.0], [0.1, 0.25, 0.7])


@pytest.fixture
def t_mu1_3(mu1):
    return moments_from_measure(mu1, 3)


@pytest.fixture
def t_mu1_4(mu1):
    return moments_from_measure(mu1, 4)


def band(lo, hi):
    return TorusInterval(lo, hi)


def bands(*pairs):
    return BandSet(tuple(TorusInterval(a, b) for a, b in pairs))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
