import numpy as np
import pytest

from pairwalk import PairParams


@pytest.fixture
def pars_half():
    return PairParams(p=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
