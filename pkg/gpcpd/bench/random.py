"""
Seeded Gaussian stream for reproducible benchmark instances.

The stream draws uniforms from numpy's PCG64 bit generator and maps pairs of
them to standard normals with Marsaglia's polar method, so a given seed gives
the same numbers on every platform and numpy version that keeps PCG64.
"""

import numpy as np


class GaussianStream:
    """Standard normal variates from a PCG64 generator via the polar method."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, size: int) -> np.ndarray:
        """Uniforms in [0, 1)."""
        return self._generator.random(size)

    def normal(self, size: int) -> np.ndarray:
        """
        Draw ``size`` independent standard normals.

        Candidate pairs (u, v) uniform on the square [-1, 1)^2 are kept when
        0 < s = u^2 + v^2 < 1 and map to u f, v f with f = sqrt(-2 ln s / s).
        """
        out = np.empty(size, dtype=np.float64)
        filled = 0
        while filled < size:
            pairs = max((size - filled + 1) // 2, 1)
            # acceptance rate is pi/4; oversample to finish in one round
            batch = int(pairs * 1.3) + 8
            u = 2.0 * self.uniform(batch) - 1.0
            v = 2.0 * self.uniform(batch) - 1.0
            s = u * u + v * v
            keep = (s > 0) & (s < 1)
            u, v, s = u[keep], v[keep], s[keep]
            f = np.sqrt(-2.0 * np.log(s) / s)
            values = np.column_stack([u * f, v * f]).ravel()
            take = min(values.size, size - filled)
            out[filled:filled + take] = values[:take]
            filled += take
        return out

    def complex_normal(self, shape) -> np.ndarray:
        """Complex array whose real and imaginary parts are independent standard normals."""
        shape = tuple(np.atleast_1d(shape).astype(int))
        count = int(np.prod(shape))
        real = self.normal(count)
        imag = self.normal(count)
        return (real + 1j * imag).reshape(shape)
