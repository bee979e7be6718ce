import numpy as np
import pytest

from cvlab.dgp import Dgp, reference_dgp, sample_dataset


@pytest.fixture
def dgp():
    return reference_dgp()


@pytest.fixture
def small_data(dgp):
    return sample_dataset(dgp, 40, seed=11)


@pytest.fixture
def probe(dgp):
    return np.random.default_rng(2024).standard_normal((25, dgp.p))


@pytest.fixture
def linear_dgp():
    return Dgp(p=3, mu_name="linear", noise_sd=0.5)
