import time

import pytest

import sgsim


@pytest.fixture(scope="session")
def calibrated_n3():
    """One default-config calibration shared by the quality and experiment
    tests; returns (report, elapsed seconds)."""
    start = time.monotonic()
    report = sgsim.minimize(3, 3, restarts=20, seed=0)
    return report, time.monotonic() - start
