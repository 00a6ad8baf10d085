import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ALPHAS = (1.0, 1.5, 2.0, 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
