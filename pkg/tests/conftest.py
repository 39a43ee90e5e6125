import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from linmod import kernels

settings.register_profile(
    "linmod", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("linmod")


@pytest.fixture(params=kernels.available_backends())
def each_backend(request):
    with kernels.backend(request.param):
        yield request.param


@pytest.fixture
def rs():
    return np.random.default_rng(20240611)
