import numpy as np
import pytest

from elasticfm.geometry import (
    MeasurementCircle,
    disk_boundary,
    kite_boundary,
    make_medium,
    make_scene,
)


@pytest.fixture(scope="session")
def medium():
    """λ=2, μ=1, ω=10, so kp=5 and ks=10."""
    return make_medium(2.0, 1.0, 10.0)


@pytest.fixture(scope="session")
def circle():
    return MeasurementCircle(4.0, 64)


@pytest.fixture(scope="session")
def unit_disk():
    return disk_boundary((0.0, 0.0), 1.0)


@pytest.fixture(scope="session")
def disk_scene(medium, circle, unit_disk):
    return make_scene(medium, circle, [unit_disk])


@pytest.fixture(scope="session")
def kite_scene(medium, circle):
    return make_scene(medium, circle, [kite_boundary()])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
