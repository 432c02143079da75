import numpy as np
import pytest


def random_spd(rng, n, scale=1.0):
    """A well-conditioned random symmetric positive-definite matrix."""
    A = rng.standard_normal((n, n))
    return scale * (A @ A.T + n * np.eye(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
