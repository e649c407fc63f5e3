import numpy as np
import pytest

from gpcpd.bench import gen_instance, load_fixture, load_fixture_factors
from gpcpd.core import CPDecomposition, DenseTensor


@pytest.fixture
def cube_3x3x3():
    return load_fixture("cube_3x3x3")


@pytest.fixture
def slices_4x4x3():
    return load_fixture("slices_4x4x3")


@pytest.fixture
def slices_4x4x3_factors():
    return load_fixture_factors("slices_4x4x3_factors")


@pytest.fixture
def planted_5x4x3x3():
    return load_fixture("planted_5x4x3x3")


@pytest.fixture
def planted_5x4x3x3_factors():
    return load_fixture_factors("planted_5x4x3x3_factors")


def random_cp(dims, r, seed):
    """Complex Gaussian factors, one n_j x r matrix per mode."""
    rng = np.random.default_rng(seed)
    return CPDecomposition(tuple(rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
                                 for n in dims))


def random_tensor(dims, seed):
    rng = np.random.default_rng(seed)
    return DenseTensor.from_array(rng.standard_normal(dims) + 1j * rng.standard_normal(dims))


@pytest.fixture
def exact_instance():
    return gen_instance((6, 5, 4), 3, 0.0, 7)


@pytest.fixture
def noisy_instance():
    return gen_instance((6, 5, 4), 3, 1e-3, 11)
