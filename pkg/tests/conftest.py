import time

import pytest

from fanplex import DenseFamilyConfig, build_fraisse_sequence


class TimedBuild:
    def __init__(self, report, seconds):
        self.report = report
        self.seconds = seconds
        self.sequence = report.sequence
        self.log = report.log


def _timed(cfg, budget):
    start = time.monotonic()
    report = build_fraisse_sequence(cfg, budget)
    return TimedBuild(report, time.monotonic() - start)


@pytest.fixture(scope="session")
def lelek200_s1():
    return _timed(DenseFamilyConfig("fan", seed=1), 200)


@pytest.fixture(scope="session")
def lelek200_s2():
    return _timed(DenseFamilyConfig("fan", seed=2), 200)


@pytest.fixture(scope="session")
def poulsen200_s1():
    return _timed(DenseFamilyConfig("simplex", seed=1), 200)


@pytest.fixture(scope="session")
def poulsen200_s2():
    return _timed(DenseFamilyConfig("simplex", seed=2), 200)


@pytest.fixture(scope="session")
def paired60():
    return _timed(DenseFamilyConfig("fan-paired", seed=3), 60)
