import numpy as np
import pytest

from lstregress import Dataset


@pytest.fixture
def seven_points():
    """Small two-line benchmark set: five points near y = x, two leverage
    points pulling toward y = 0."""
    x = np.array([5.0, 5.5, 4.0, 3.5, 3.0, 2.5, -2.0])
    y = np.array([-0.5, -0.5, 6.0, 4.0, 2.4, 2.0, 0.5])
    return Dataset(x, y)


@pytest.fixture
def perfect_line():
    """y generated exactly from beta = (1.5, -2) with no noise."""
    rng = np.random.default_rng(99)
    x = rng.standard_normal(12)
    beta = np.array([1.5, -2.0])
    d0 = Dataset(x, np.zeros(12))
    y = d0.design @ beta
    return Dataset(x, y), beta


def make_clean(n, p, seed):
    rng = np.random.default_rng(seed)
    return Dataset(rng.standard_normal((n, p - 1)), rng.standard_normal(n))
