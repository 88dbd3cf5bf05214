import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,  # first numba call compiles; wall-clock deadlines misfire
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def warm_solver():
    """Touch the jit kernel once so timed tests measure steady state."""
    from factorlens.solver import fit_elastic_net

    rng = np.random.default_rng(0)
    fit_elastic_net(rng.standard_normal((8, 2)), rng.standard_normal(8), 0.1, 1.0)
    return True
