"""
Generalized eigenvalue (GEVD) baseline for order-3 tensors with r <= n_2.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from ..core.tensor import (
    CPDecomposition,
    DenseTensor,
    descending_mode_order,
    inverse_permutation,
    khatri_rao,
    mode_product,
    normalize_cp,
    permute_modes,
    unfold,
)
from ..exceptions import PencilError, RankBoundError, ShapeMismatchError
from .linalg import rank1_matrix, solve_least_squares

logger = logging.getLogger(__name__)

PENCIL_GAP_TOL = 1e-10
PENCIL_CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class GevdWorkspace:
    """
    Intermediate quantities of the GEVD method on sorted modes.

    Attributes:
        F1, F2: r x r slice matrices (F2 is a random slice combination after a retry)
        eigvals: Generalized eigenvalues of the pencil (F1^T, F2^T)
        pencil_eigvecs: Generalized eigenvectors as columns
        Fhat: X^T applied on mode 1 of F[:r]; every slice Fhat[s] is rank 1 on exact input
        retried: Whether F2 was replaced by a random slice combination
    """

    F1: np.ndarray
    F2: np.ndarray
    eigvals: np.ndarray
    pencil_eigvecs: np.ndarray
    Fhat: DenseTensor
    retried: bool = False

    def slice_ratios(self) -> np.ndarray:
        """sigma_2 / sigma_1 of every slice Fhat[s]."""
        ratios = []
        for s in range(self.Fhat.dims[0]):
            sigma = linalg.svdvals(self.Fhat.array[s])
            ratios.append(sigma[1] / sigma[0] if sigma.size > 1 and sigma[0] > 0 else 0.0)
        return np.array(ratios)


def _pencil_problem(w: np.ndarray, x: np.ndarray) -> Optional[str]:
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(x))):
        return "pencil is singular (infinite or undefined eigenvalues)"
    if w.size > 1:
        diffs = np.abs(w[:, None] - w[None, :])
        diffs[np.diag_indices_from(diffs)] = np.inf
        scale = max(1.0, float(np.max(np.abs(w))))
        if np.min(diffs) <= PENCIL_GAP_TOL * scale:
            return "pencil eigenvalues are not distinct"
    condition = np.linalg.cond(x)
    if not condition <= PENCIL_CONDITION_LIMIT:
        return f"eigenvector matrix condition {condition:.3e} too large"
    return None


def _solve_pencil(f1: np.ndarray, f2: np.ndarray) -> Tuple[np.ndarray, np.ndarray, Optional[str]]:
    try:
        w, x = linalg.eig(f1.T, f2.T)
    except linalg.LinAlgError as e:
        return np.array([]), np.array([[]]), f"generalized eigensolver failed: {e}"
    return w, x, _pencil_problem(w, x)


def build_gevd_workspace(t: DenseTensor, r: int, seed: int = 0) -> GevdWorkspace:
    """
    Solve the slice pencil of a sorted order-3 tensor and transform F[:r].

    When the pencil of the first two slices is singular or has repeated
    eigenvalues, F2 is replaced once by a random combination of all slices.

    Args:
        t: Order-3 tensor with decreasing dims
        r: Target rank, at most n_2
        seed: Seed for the slice combination retry

    Returns:
        GevdWorkspace
    """
    if t.order != 3:
        raise ShapeMismatchError(f"GEVD needs an order-3 tensor, got order {t.order}", order=t.order)
    n1, n2, n3 = t.dims
    if r < 1 or r > n2:
        raise RankBoundError(f"GEVD needs 1 <= r <= n_2 = {n2}, got {r}", bound="n_2", rank=r, limit=n2)
    if n3 < 2:
        raise ShapeMismatchError("GEVD needs at least two slices in mode 3", dims=list(t.dims))

    f1 = t.array[:r, :r, 0]
    f2 = t.array[:r, :r, 1]
    w, x, problem = _solve_pencil(f1, f2)
    retried = False
    if problem is not None:
        logger.warning("GEVD pencil rejected (%s), retrying with a random slice combination", problem)
        rng = np.random.default_rng(seed)
        weights = rng.standard_normal(n3) + 1j * rng.standard_normal(n3)
        f2 = np.tensordot(t.array[:r, :r, :], weights, axes=(2, 0))
        w, x, problem = _solve_pencil(f1, f2)
        retried = True
        if problem is not None:
            raise PencilError(f"GEVD pencil unusable after slice recombination: {problem}",
                              rank=r, dims=list(t.dims))
    fhat = mode_product(x.T, 0, DenseTensor.from_array(t.array[:r]))
    return GevdWorkspace(f1, f2, w, x, fhat, retried)


def gevd_decompose(t: DenseTensor, r: int, seed: int = 0) -> CPDecomposition:
    """
    Rank-r decomposition of an order-3 tensor by the GEVD method.

    Each slice of the transformed tensor is a rank-1 matrix y_s z_s^T giving
    the mode-2 and mode-3 vectors; mode 1 then solves a linear least-squares
    problem with one right-hand side per mode-1 row.

    Args:
        t: Order-3 tensor (any mode order)
        r: Target rank, at most the middle dimension after sorting
        seed: Seed for the slice combination retry

    Returns:
        Normalized CPDecomposition in the input's mode order
    """
    if t.order != 3:
        raise ShapeMismatchError(f"GEVD needs an order-3 tensor, got order {t.order}", order=t.order)
    perm = descending_mode_order(t.dims)
    ts = permute_modes(t, perm)
    ws = build_gevd_workspace(ts, r, seed)
    n1, n2, n3 = ts.dims
    u2 = np.zeros((n2, r), dtype=np.complex128)
    u3 = np.zeros((n3, r), dtype=np.complex128)
    for s in range(r):
        y, z, _ = rank1_matrix(ws.Fhat.array[s])
        u2[:, s] = y
        u3[:, s] = z
    result = solve_least_squares(khatri_rao([u2, u3]), unfold(ts.array, 0).T)
    logger.debug("GEVD mode-1 residual %.3e via %s", result.residual, result.method)
    cp = CPDecomposition((result.solution.T, u2, u3))
    return normalize_cp(cp.permute_modes(inverse_permutation(perm)))
