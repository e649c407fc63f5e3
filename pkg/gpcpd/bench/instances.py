"""
Planted perturbation instances, closed-form reference tensors and shipped fixtures.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..core.parser import read_factors, read_tensor
from ..core.tensor import CPDecomposition, DenseTensor, hs_norm
from ..exceptions import ParameterError
from .random import GaussianStream

logger = logging.getLogger(__name__)

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "data" / "fixtures"


@dataclass(frozen=True, eq=False)
class PerturbationInstance:
    """
    Planted rank-r tensor R, noise E with ||E|| = epsilon, and F = R + E.

    Attributes:
        R: Ground truth tensor (expansion of ``factors``)
        E: Noise tensor, zero when epsilon is 0
        F: Observed tensor R + E
        epsilon: Noise norm
        seed: Seed of the Gaussian stream
        r_true: Planted rank
        factors: Planted decomposition of R
    """

    R: DenseTensor
    E: DenseTensor
    F: DenseTensor
    epsilon: float
    seed: int
    r_true: int
    factors: CPDecomposition

    @property
    def dims(self):
        return self.F.dims


def gen_instance(dims: Sequence[int], r: int, epsilon: float, seed: int) -> PerturbationInstance:
    """
    Draw a planted instance from a seeded Gaussian stream.

    Factors come first (mode by mode, n_j x r each), then the noise tensor G,
    which is scaled to E = epsilon G / ||G||.

    Args:
        dims: Tensor dimensions
        r: Planted rank
        epsilon: Noise norm, nonnegative
        seed: Stream seed

    Returns:
        PerturbationInstance
    """
    if epsilon < 0:
        raise ParameterError(f"epsilon must be nonnegative, got {epsilon}", name="epsilon", value=epsilon)
    stream = GaussianStream(seed)
    factors = CPDecomposition(tuple(stream.complex_normal((n, r)) for n in dims))
    R = factors.expand()
    if epsilon == 0:
        E = DenseTensor.zeros(R.dims)
    else:
        G = DenseTensor.from_array(stream.complex_normal(tuple(dims)))
        E = G * (epsilon / hs_norm(G))
    logger.debug("Instance dims %s r=%d epsilon=%g seed=%d", tuple(dims), r, epsilon, seed)
    return PerturbationInstance(R, E, R + E, float(epsilon), int(seed), int(r), factors)


def sqrt_sum_tensor() -> DenseTensor:
    """5 x 5 x 4 tensor with entries i1 + i2/2 + i3/3 + sqrt(i1^2 + i2^2 + i3^2), 1-based."""
    i1, i2, i3 = np.meshgrid(np.arange(1, 6), np.arange(1, 6), np.arange(1, 5), indexing="ij")
    return DenseTensor.from_array(i1 + i2 / 2 + i3 / 3 + np.sqrt(i1 ** 2 + i2 ** 2 + i3 ** 2))


def arctan_tensor() -> DenseTensor:
    """6 x 6 x 6 x 5 x 4 tensor with entries arctan(i1 + 2 i2 + 3 i3 + 4 i4 + 5 i5), 1-based."""
    dims = (6, 6, 6, 5, 4)
    grids = np.meshgrid(*[np.arange(1, n + 1) for n in dims], indexing="ij")
    linear = sum((w + 1) * g for w, g in enumerate(grids))
    return DenseTensor.from_array(np.arctan(linear))


def fixture_path(name: str) -> Path:
    path = FIXTURE_DIR / f"{name}.json"
    if not path.exists():
        available = sorted(p.stem for p in FIXTURE_DIR.glob("*.json"))
        raise FileNotFoundError(f"No fixture named {name!r}; available: {available}")
    return path


def load_fixture(name: str) -> DenseTensor:
    """Load a shipped ctensor-v1 fixture, e.g. ``slices_4x4x3``."""
    return read_tensor(fixture_path(name))


def load_fixture_factors(name: str) -> CPDecomposition:
    """Load a shipped cpfactors-v1 fixture, e.g. ``slices_4x4x3_factors``."""
    return read_factors(fixture_path(name))
