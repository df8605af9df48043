import numpy as np
import pytest

from coherence_monotone.states import validate_density

# qubit with off-diagonal b = 0.25 used throughout
SIGMA = np.array([[0.75, 0.25], [0.25, 0.25]])


@pytest.fixture
def sigma():
    return validate_density(SIGMA)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
