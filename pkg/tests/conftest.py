import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "desk", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("desk")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
