import pytest
from hypothesis import HealthCheck, settings

from npcfid.analysis import gen_calibration, noiseless_calibration

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def cal8():
    return gen_calibration(8, seed=7)


@pytest.fixture(scope="session")
def cal2():
    return gen_calibration(2, seed=11)


@pytest.fixture(scope="session")
def quiet2():
    return noiseless_calibration(2)


@pytest.fixture(scope="session")
def quiet4():
    return noiseless_calibration(4)
