import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def e1(dim: int = 2) -> np.ndarray:
    x = np.zeros(dim)
    x[0] = 1.0
    return x
