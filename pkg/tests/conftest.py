import numpy as np
import pytest

from cwphase import DEFAULT_ACCURACY, ModelParams


@pytest.fixture(scope="session")
def params():
    return ModelParams()


@pytest.fixture(scope="session")
def acc():
    return DEFAULT_ACCURACY


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)
