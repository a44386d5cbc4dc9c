import numpy as np
import pytest

from polarshape.channels import builtin_channel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def zch():
    return builtin_channel("zchannel", [0.3])


@pytest.fixture
def bsc02():
    return builtin_channel("bsc", [0.2])
