import numpy as np
import pytest

from sqbessel import chebfit


@pytest.fixture(scope="session")
def collection():
    """All bundled 1e-8 patch sets."""
    return chebfit.default_collection()


@pytest.fixture(scope="session")
def patchset(collection):
    """The bundled [0.1, 0.2] patch set at 1e-8."""
    return collection.for_delta(0.15)


@pytest.fixture(scope="session")
def patchset_coarse():
    """The bundled [0.1, 0.2] patch set at 1e-4."""
    return chebfit.default_collection(accuracy=1e-4).for_delta(0.15)


@pytest.fixture(scope="session")
def rng_np():
    return np.random.default_rng(20240914)
