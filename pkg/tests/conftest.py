import numpy as np
import pytest


def random_instance(rng, n, d, c, zmin=0.2, zmax=3.0):
    """Data whose projections under (m, W) stay at least ``zmin`` away from zero."""
    W = rng.standard_normal((d, d)) + 2.0 * np.eye(d)
    m = rng.standard_normal(d)
    z = rng.uniform(zmin, zmax, (n, d)) * np.where(rng.random((n, d)) < 0.4, -1.0, 1.0)
    # both sides of every component must be populated
    z[0] = -np.abs(z[0])
    z[1] = np.abs(z[1])
    X = np.linalg.solve(W, z.T).T + m
    return X, m, W, c


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def instance_factory():
    return random_instance
