import os

import pytest
from hypothesis import HealthCheck, settings

from tests.helpers import reach_avoid_mdp, small_lake

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.register_profile(
    "dev",
    max_examples=10,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def reach_mdp():
    """s0 --a--> target 0.7 / unsafe 0.3; s0 --b--> target 0.4 / s0 0.6."""
    return reach_avoid_mdp(b_to_unsafe=False)


@pytest.fixture
def risky_reach_mdp():
    """As reach_mdp, but action b goes to the unsafe state instead of looping."""
    return reach_avoid_mdp(b_to_unsafe=True)


@pytest.fixture(scope="session")
def lake():
    return small_lake()
