import numpy as np
import pytest

from rimlab.config import load_run_config


@pytest.fixture(scope="session")
def desk():
    return load_run_config("desk-64")


@pytest.fixture(scope="session")
def paper():
    return load_run_config("paper-table1")


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
