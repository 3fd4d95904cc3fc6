import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from socialgrad import (
    ExperimentConfig,
    load_preset,
    make_sublevel_geometry,
    sample_initial_conditions,
)

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def agg():
    return load_preset("aggregative-5")


@pytest.fixture(scope="session")
def osc():
    return load_preset("oscillator-2")


@pytest.fixture(scope="session")
def agg_geom80(agg):
    return make_sublevel_geometry(agg.game, agg.objective, c_frac=0.8)


@pytest.fixture(scope="session")
def agg_geom99(agg):
    return make_sublevel_geometry(agg.game, agg.objective, c_frac=0.99)


@pytest.fixture(scope="session")
def osc_geom95(osc):
    return make_sublevel_geometry(osc.game, osc.objective, c_frac=0.95)


@pytest.fixture(scope="session")
def draw_admissible():
    """Sampler for seeded (x0, p0) pairs inside a working sublevel set."""

    def draw(game, objective, geom, count, seed=0):
        cfg = ExperimentConfig(experiment="flow", preset=None,
                               num_initial_conditions=count, seed=seed)
        return sample_initial_conditions(cfg, game, objective, geom)

    return draw


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(7)))
