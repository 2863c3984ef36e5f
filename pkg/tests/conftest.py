import numpy as np
import pytest

from tangible_volume.spatial import Pose, quat_normalize


def random_quat(rng: np.random.Generator) -> np.ndarray:
    return quat_normalize(rng.normal(size=4))


def random_pose(rng: np.random.Generator, scale: float = 1.0) -> Pose:
    return Pose(rng.uniform(-scale, scale, size=3), random_quat(rng))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
