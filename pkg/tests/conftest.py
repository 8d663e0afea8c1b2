"""
Shared fixtures: seeded generators and precomputed reference series.
"""

import pytest

from app.services.scenarios import run_scenario, scenario_fig1, scenario_fig2
from app.utils.sampling import make_rng


# -------------------------------------------------------------------
# Constants
# -------------------------------------------------------------------

GRID_POINTS = 1001
EF_HALF_ETA = 0.354579


# -------------------------------------------------------------------
# Fixtures
# -------------------------------------------------------------------

@pytest.fixture
def rng():
    """Fresh seeded generator per test."""
    return make_rng(7)


@pytest.fixture(scope="session")
def fig1_records():
    return run_scenario(scenario_fig1(GRID_POINTS))


@pytest.fixture(scope="session")
def fig2_half_cfg():
    return scenario_fig2(0.5, GRID_POINTS)


@pytest.fixture(scope="session")
def fig2_half_records(fig2_half_cfg):
    return run_scenario(fig2_half_cfg)


@pytest.fixture(scope="session")
def fig2_zero_records():
    return run_scenario(scenario_fig2(0.0, GRID_POINTS))
