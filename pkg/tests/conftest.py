import numpy as np
import pytest

from inandout import bodies


@pytest.fixture
def unit_disk():
    return bodies.make_ball([0.0, 0.0], 1.0)


@pytest.fixture
def unit_square():
    return bodies.make_box([0.0, 0.0], [1.0, 1.0])


@pytest.fixture
def annulus():
    # radii 1/2 and 1, centered at the origin: certificate (4/3, 1)
    disk = bodies.make_ball([0.0, 0.0], 1.0)
    hole = bodies.make_ball([0.0, 0.0], 0.5)
    return bodies.exclusion(disk, hole, disk.exact_volume - hole.exact_volume)


@pytest.fixture
def l_shape():
    # two unit-thickness boxes sharing an edge; exact union volume 3
    a = bodies.make_box([0.0, 0.0], [2.0, 1.0])
    b = bodies.make_box([0.0, 1.0], [1.0, 2.0])
    return bodies.union([a, b], 3.0)


@pytest.fixture
def cross():
    arm1 = bodies.make_box([-2.0, -0.5], [2.0, 0.5])
    arm2 = bodies.make_box([-0.5, -2.0], [0.5, 2.0])
    return bodies.star_shaped([arm1, arm2], 0.5)


@pytest.fixture
def thin_box():
    return bodies.make_box([0.0, 0.0], [1.0, 1e-3])


def rng_of(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
