import numpy as np
import pytest

import nullbeam as nb


def complex_normal(rng, *shape):
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def small_scenario(num_emitters=4, num_readers=1, seed=0):
    """Compact random room for fast stochastic tests."""
    rng = np.random.default_rng(seed)
    emitters = rng.uniform([0.2, 0.2, 2.0], [3.8, 7.8, 2.4], size=(num_emitters, 3))
    readers = rng.uniform([0.5, 0.5, 0.8], [3.5, 7.5, 1.4], size=(num_readers, 3))
    return nb.Scenario(
        emitter_positions=emitters,
        bd_position=np.array([2.0, 3.0, 1.0]),
        reader_positions=readers,
    )


@pytest.fixture(scope="session")
def default_scenario():
    return nb.default_techtile_scenario()


@pytest.fixture(scope="session")
def default_channels(default_scenario):
    return nb.los_channel(default_scenario)


@pytest.fixture(scope="session")
def default_grid(default_scenario):
    reader = default_scenario.reader_positions[0]
    return nb.GridSpec.centered(
        (reader[0], reader[1]), extent=(1.25, 1.25), step=0.025,
        plane_height=reader[2],
    )
