"""
Dense least squares and rank-1 matrix helpers shared by the algorithms.
"""

import functools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

# Pivoted-QR condition estimate above which the SVD solver takes over.
QR_CONDITION_LIMIT = 1e12
# Sweep limit and relative tolerance of the rank-1 power iteration.
RANK1_SWEEPS = 100
RANK1_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class LeastSquaresSolution:
    """
    Result of a dense least-squares solve.

    Attributes:
        solution: Minimizer X of ||A X - B||
        method: "qr", "svd" or "ridge"
        condition: Condition estimate of A from the pivoted R factor
        residual: Frobenius norm of A X - B
    """

    solution: np.ndarray
    method: str
    condition: float
    residual: float


def _qr_condition(r_factor: np.ndarray) -> float:
    diag = np.abs(np.diag(r_factor))
    if diag.size == 0:
        return 1.0
    if diag[-1] == 0:
        return float("inf")
    return float(diag[0] / diag[-1])


def _ridge_svd(a: np.ndarray, b: np.ndarray, ridge: float) -> np.ndarray:
    u, sigma, vh = linalg.svd(a, full_matrices=False)
    filt = sigma / (sigma ** 2 + ridge)
    return vh.conj().T @ (filt * (u.conj().T @ b).T).T


def solve_least_squares(a: np.ndarray, b: np.ndarray, ridge: Optional[float] = None) -> LeastSquaresSolution:
    """
    Solve min ||A X - B|| with column-pivoted QR, falling back to SVD.

    The SVD route returns the minimum-norm solution and is used when A is wide
    or the pivoted QR condition estimate exceeds QR_CONDITION_LIMIT. With a
    ``ridge`` the fallback instead minimizes ||A X - B||^2 + ridge ||X||^2
    from the same SVD and reports method "ridge".

    Args:
        a: Coefficient matrix (rows x cols)
        b: Right-hand side vector or matrix with the same row count
        ridge: Tikhonov weight for the fallback route

    Returns:
        LeastSquaresSolution
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    rows, cols = a.shape
    if cols == 0:
        empty = np.zeros((0,) + b.shape[1:], dtype=np.complex128)
        return LeastSquaresSolution(empty, "qr", 1.0, float(np.linalg.norm(b)))

    condition = float("inf")
    if rows >= cols:
        q, r_factor, piv = linalg.qr(a, mode="economic", pivoting=True)
        condition = _qr_condition(r_factor)
        if condition <= QR_CONDITION_LIMIT:
            permuted = linalg.solve_triangular(r_factor, q.conj().T @ b)
            x = np.empty_like(permuted)
            x[piv] = permuted
            return LeastSquaresSolution(x, "qr", condition, float(np.linalg.norm(a @ x - b)))
        logger.warning("Pivoted QR condition %.3e exceeds %.0e, using SVD least squares",
                       condition, QR_CONDITION_LIMIT)

    if ridge is not None:
        x = _ridge_svd(a, b, max(ridge, np.finfo(float).tiny))
        return LeastSquaresSolution(x, "ridge", condition, float(np.linalg.norm(a @ x - b)))
    x, _, _, _ = linalg.lstsq(a, b, lapack_driver="gelsd")
    return LeastSquaresSolution(x, "svd", condition, float(np.linalg.norm(a @ x - b)))


def rank1_matrix(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Best rank-1 approximation u v^T of a matrix by its dominant singular triple.

    Args:
        m: Complex matrix

    Returns:
        Tuple of (u scaled by sigma_1, v, residual norm sqrt(sum_{i>=2} sigma_i^2))
    """
    u, sigma, vh = linalg.svd(m, full_matrices=False)
    residual = float(np.sqrt(np.sum(sigma[1:] ** 2)))
    return sigma[0] * u[:, 0], vh[0, :], residual


def kron_split(w: np.ndarray, sizes: Sequence[int]) -> Tuple[List[np.ndarray], float]:
    """
    Split a vector into Kronecker factors w ~ a_1 (x) a_2 (x) ... (x) a_k.

    Factors are peeled off left to right by best rank-1 matrix approximations;
    the scale ends up on the first factor.

    Args:
        w: Vector of length prod(sizes)
        sizes: Lengths of the factors

    Returns:
        Tuple of (factor vectors, relative residual ||w - kron|| / ||w||)
    """
    w = np.asarray(w, dtype=np.complex128)
    if w.size != int(np.prod(sizes)):
        raise ValueError(f"Vector of length {w.size} cannot split into sizes {tuple(sizes)}")
    factors: List[np.ndarray] = []
    rest = w
    for size in sizes[:-1]:
        u, v, _ = rank1_matrix(rest.reshape(size, -1))
        factors.append(u)
        rest = v
    factors.append(rest)
    approx = functools.reduce(np.kron, factors)
    norm = np.linalg.norm(w)
    relative = float(np.linalg.norm(w - approx) / norm) if norm > 0 else 0.0
    return factors, relative


def leading_vectors(array: np.ndarray) -> List[np.ndarray]:
    """Dominant left singular vector of every mode unfolding (truncated HOSVD)."""
    vectors = []
    for mode in range(array.ndim):
        unfolded = np.moveaxis(array, mode, 0).reshape(array.shape[mode], -1)
        u, _, _ = linalg.svd(unfolded, full_matrices=False)
        vectors.append(u[:, 0])
    return vectors


def rank1_power(array: np.ndarray, init: Sequence[np.ndarray], max_sweeps: int = RANK1_SWEEPS,
                tol: float = RANK1_TOL) -> List[np.ndarray]:
    """
    Rank-1 fit a_1 (x) ... (x) a_k of a tensor by alternating power sweeps.

    Each sweep replaces every vector in turn by the contraction of the tensor
    with the conjugates of the others, divided by their squared norms. The
    first vector is updated first, so its initial value only fixes the length.

    Args:
        array: Complex array of order k >= 2
        init: Starting vectors, one per mode
        max_sweeps: Sweep limit
        tol: Stop once the fit changes by less than this relative amount

    Returns:
        The k vectors; the scale ends up on the last one updated
    """
    array = np.asarray(array, dtype=np.complex128)
    vectors = [np.asarray(v, dtype=np.complex128).copy() for v in init]
    letters = "abcdefghijklmnopqrstuvwxyz"[:array.ndim]
    previous = np.inf
    for _ in range(max_sweeps):
        for mode in range(array.ndim):
            others = [j for j in range(array.ndim) if j != mode]
            weight = np.prod([np.vdot(vectors[j], vectors[j]).real for j in others])
            if weight == 0:
                return [np.zeros_like(v) for v in vectors]
            spec = letters + "," + ",".join(letters[j] for j in others) + "->" + letters[mode]
            vectors[mode] = np.einsum(spec, array, *[vectors[j].conj() for j in others]) / weight
        fit = float(np.prod([np.vdot(v, v).real for v in vectors]))
        if abs(fit - previous) <= tol * max(fit, np.finfo(float).tiny):
            break
        previous = fit
    return vectors
