"""
Exact CP decomposition by simultaneous diagonalization of generating matrices,
directly or through an order-3 reshaping.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..core.flattening import ReshapePlan, choose_reshape_plan, reshape3
from ..core.tensor import (
    CPDecomposition,
    DenseTensor,
    descending_mode_order,
    hs_norm,
    inverse_permutation,
    khatri_rao,
    normalize_cp,
    numerical_rank,
    permute_modes,
    unfold,
)
from ..exceptions import DegenerateSpectrumError, InvalidPlanError, RankDeficientError, ReshapeFactorizationError
from .genpoly import FULL_RANK_TOL, BlockLabel, GenPolySystem, build_system, solve_blocks
from .linalg import kron_split, rank1_matrix, rank1_power, solve_least_squares

logger = logging.getLogger(__name__)

EIG_GAP_TOL = 1e-10
DEFAULT_XI_REDRAWS = 5
KRON_SPLIT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class EigenCombination:
    """
    Eigendecomposition of the combined block Y[xi] = (sum xi)^-1 sum xi_jk Y_jk.

    Attributes:
        xi: Weights per block label
        Y_combined: The r x r combined matrix
        P: Eigenvectors as unit-norm columns
        eigvals: Eigenvalues in the column order of P
        min_eig_gap: Smallest pairwise eigenvalue distance (inf when r = 1)
        condition: 2-norm condition number of P
    """

    xi: Dict[BlockLabel, complex]
    Y_combined: np.ndarray
    P: np.ndarray
    eigvals: np.ndarray
    min_eig_gap: float
    condition: float


@dataclass(frozen=True, eq=False)
class GenPolyPass:
    """Everything one generating-polynomial pass produces on sorted modes."""

    cp: CPDecomposition
    system: GenPolySystem
    eig: EigenCombination
    attempts: int
    offdiag_mass: float
    residuals: Dict[str, float] = field(default_factory=dict)


def draw_xi(upsilon: Sequence[BlockLabel], seed: int) -> Dict[BlockLabel, complex]:
    """
    Draw unit-modulus weights with phases uniform in (-pi/2, pi/2).

    Every weight has positive real part, so their sum never vanishes.
    """
    rng = np.random.default_rng(seed)
    phases = rng.uniform(-np.pi / 2, np.pi / 2, size=len(upsilon))
    return {label: complex(np.exp(1j * phase)) for label, phase in zip(upsilon, phases)}


def _min_gap(w: np.ndarray) -> float:
    if w.size < 2:
        return float("inf")
    diffs = np.abs(w[:, None] - w[None, :])
    diffs[np.diag_indices_from(diffs)] = np.inf
    return float(np.min(diffs))


def combine_and_diagonalize(sys: GenPolySystem, xi: Dict[BlockLabel, complex]) -> EigenCombination:
    """
    Combine the solved blocks with weights xi and diagonalize the result.

    Eigenpairs are sorted by decreasing real part, then decreasing imaginary part.

    Args:
        sys: Solved generating-polynomial system
        xi: Weights per block label

    Returns:
        EigenCombination
    """
    r = sys.rank
    if sys.upsilon:
        total = sum(xi[label] for label in sys.upsilon)
        combined = sum(xi[label] * sys.Y[label] for label in sys.upsilon) / total
    else:
        combined = np.zeros((r, r), dtype=np.complex128)
    scale = float(np.linalg.norm(combined))
    threshold = EIG_GAP_TOL * scale

    try:
        w, P = linalg.eig(combined)
    except linalg.LinAlgError as e:
        raise DegenerateSpectrumError(f"Eigensolver failed: {e}", min_gap=0.0, threshold=threshold) from e
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(P))):
        raise DegenerateSpectrumError("Eigensolver returned non-finite values", min_gap=0.0, threshold=threshold)

    order = np.lexsort((-w.imag, -w.real))
    w = w[order]
    P = P[:, order]
    P = P / np.linalg.norm(P, axis=0)

    gap = _min_gap(w)
    if not gap > threshold:
        raise DegenerateSpectrumError(
            f"Minimum eigenvalue gap {gap:.3e} not above {threshold:.3e}",
            min_gap=gap, threshold=threshold)
    condition = float(np.linalg.cond(P))
    if not np.isfinite(condition):
        raise DegenerateSpectrumError("Eigenvector matrix is singular", min_gap=gap, threshold=threshold)
    logger.debug("Combined block: min gap %.3e (threshold %.3e), cond(P) %.3e", gap, threshold, condition)
    return EigenCombination(dict(xi), combined, P, w, gap, condition)


def _similarity(eig: EigenCombination, y: np.ndarray) -> np.ndarray:
    return linalg.solve(eig.P, y @ eig.P)


def extract_modes(sys: GenPolySystem, eig: EigenCombination) -> List[np.ndarray]:
    """
    Read the mode-j vectors (j >= 2, 0-based) off the diagonals of P^-1 Y_jk P.

    Returns:
        One n_j x r matrix per mode j = 2..m-1; column s is v^{s,j}, whose first entry is 1
    """
    r = sys.rank
    modes = []
    for j in range(2, len(sys.dims)):
        v = np.ones((sys.dims[j], r), dtype=np.complex128)
        for k in range(1, sys.dims[j]):
            v[k] = np.diag(_similarity(eig, sys.Y[(j, k)]))
        modes.append(v)
    return modes


def offdiagonal_mass(sys: GenPolySystem, eig: EigenCombination) -> float:
    """Largest ||offdiag(P^-1 Y_jk P)|| / ||Y_jk|| over the blocks."""
    worst = 0.0
    for label in sys.upsilon:
        y = sys.Y[label]
        norm = np.linalg.norm(y)
        if norm == 0:
            continue
        d = _similarity(eig, y)
        off = d - np.diag(np.diag(d))
        worst = max(worst, float(np.linalg.norm(off) / norm))
    return worst


def project_modes(t: DenseTensor, eig: EigenCombination, v: Sequence[np.ndarray]
                  ) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Recover modes 2..m by projecting F[:r] onto the eigenvectors.

    Row s of P^-1 F[:r], reshaped to dims n_2 x ... x n_m, is replaced by its
    best rank-1 structure: the dominant singular pair for order-3 tensors and
    power sweeps started from the diagonal vectors v^{s,j} otherwise.

    Args:
        t: Tensor with decreasing dims
        eig: Accepted eigen-combination
        v: Mode matrices from extract_modes

    Returns:
        Tuple of (n_2 x r matrix y, one n_j x r matrix per mode j = 2..m-1)
    """
    r = eig.P.shape[0]
    rest = t.dims[1:]
    projected = linalg.solve(eig.P, t.array[:r].reshape(r, -1))
    y = np.zeros((rest[0], r), dtype=np.complex128)
    modes = [np.zeros_like(vj) for vj in v]
    for s in range(r):
        block = projected[s].reshape(rest)
        if len(rest) == 2:
            first, second, _ = rank1_matrix(block)
            vectors = [first, second]
        else:
            vectors = rank1_power(block, [np.ones(rest[0])] + [vj[:, s] for vj in v])
        y[:, s] = vectors[0]
        for mode, vector in zip(modes, vectors[1:]):
            mode[:, s] = vector
    return y, modes


def _checked_solve(kr: np.ndarray, rhs: np.ndarray, j: int, r: int):
    rank = numerical_rank(kr, FULL_RANK_TOL)
    if rank < r:
        raise RankDeficientError(f"Coefficient matrix for mode {j} has numerical rank {rank} < {r}",
                                 j=j, numerical_rank=rank, required=r)
    return solve_least_squares(kr, rhs)


def solve_mode2(t: DenseTensor, eig: EigenCombination, v: Sequence[np.ndarray]) -> np.ndarray:
    """
    Least-squares y_s in F[:r] = sum_s p_s (x) y_s (x) v^{s,3} (x) ... (x) v^{s,m}.

    Args:
        t: Tensor with decreasing dims
        eig: Accepted eigen-combination
        v: Mode matrices from extract_modes

    Returns:
        n_2 x r matrix with columns y_s
    """
    r = eig.P.shape[0]
    kr = khatri_rao([eig.P] + list(v))
    result = _checked_solve(kr, unfold(t.array[:r], 1).T, 1, r)
    logger.debug("Mode-2 solve residual %.3e via %s", result.residual, result.method)
    return result.solution.T


def solve_mode1_tail(t: DenseTensor, y: np.ndarray, v: Sequence[np.ndarray]) -> np.ndarray:
    """
    Least-squares z_s in F[r:] = sum_s z_s (x) y_s (x) v^{s,3} (x) ... (x) v^{s,m}.

    Each mode-1 row is an independent right-hand side of the same system.

    Returns:
        (n_1 - r) x r matrix with columns z_s (empty when n_1 = r)
    """
    r = y.shape[1]
    tail = t.array[r:]
    if tail.shape[0] == 0:
        return np.zeros((0, r), dtype=np.complex128)
    kr = khatri_rao([y] + list(v))
    result = _checked_solve(kr, unfold(tail, 0).T, 0, r)
    logger.debug("Mode-1 tail residual %.3e via %s", result.residual, result.method)
    return result.solution.T


def generating_polynomial_pass(t: DenseTensor, r: int, seed: int, xi_redraws: int = DEFAULT_XI_REDRAWS,
                               recovery: str = "diagonal") -> GenPolyPass:
    """
    Run the generating-polynomial method on a tensor with decreasing dims.

    On a degenerate spectrum xi is redrawn with seeds seed+1, ..., seed+xi_redraws.
    With recovery "diagonal" modes 3..m come from the diagonals of P^-1 Y_jk P
    and mode 2 from least squares; with "projection" both come from
    project_modes. The two agree on exact input.

    Args:
        t: Tensor with decreasing dims and order at least 3
        r: Target rank
        seed: Seed for the xi weights
        xi_redraws: Number of redraws allowed
        recovery: "diagonal" or "projection"

    Returns:
        GenPolyPass with the factors in the tensor's own mode order
    """
    system = solve_blocks(build_system(t, r))
    eig = None
    last_error: Optional[DegenerateSpectrumError] = None
    attempts = 0
    for attempt in range(xi_redraws + 1):
        attempts = attempt + 1
        try:
            eig = combine_and_diagonalize(system, draw_xi(system.upsilon, seed + attempt))
            break
        except DegenerateSpectrumError as e:
            last_error = e
            logger.warning("Degenerate spectrum with seed %d (gap %.3e), redrawing xi",
                           seed + attempt, e.details.get("min_gap", 0.0))
    if eig is None:
        raise DegenerateSpectrumError(
            f"Spectrum still degenerate after {xi_redraws} redraws",
            min_gap=last_error.details.get("min_gap"), threshold=last_error.details.get("threshold"),
            attempts=attempts)

    v = extract_modes(system, eig)
    if recovery == "projection":
        y, v = project_modes(t, eig, v)
    elif recovery == "diagonal":
        y = solve_mode2(t, eig, v)
    else:
        raise ValueError(f"Unknown mode recovery: {recovery}")
    z = solve_mode1_tail(t, y, v)
    cp = CPDecomposition(tuple([np.vstack([eig.P, z]), y] + v))
    return GenPolyPass(
        cp=cp,
        system=system,
        eig=eig,
        attempts=attempts,
        offdiag_mass=offdiagonal_mass(system, eig),
        residuals={f"Y[{j},{k}]": res for (j, k), res in system.residuals.items()},
    )


def sorted_pass(t: DenseTensor, r: int, seed: int, xi_redraws: int = DEFAULT_XI_REDRAWS,
                recovery: str = "diagonal") -> Tuple[CPDecomposition, GenPolyPass]:
    """
    Sort modes by decreasing dimension, run the pass and map factors back.

    Returns:
        Tuple of (normalized decomposition in the original mode order, the raw pass)
    """
    perm = descending_mode_order(t.dims)
    result = generating_polynomial_pass(permute_modes(t, perm), r, seed, xi_redraws, recovery)
    return normalize_cp(result.cp.permute_modes(inverse_permutation(perm))), result


def decompose(t: DenseTensor, r: int, seed: int = 0, xi_redraws: int = DEFAULT_XI_REDRAWS) -> CPDecomposition:
    """
    Rank-r CP decomposition of a tensor by generating polynomials.

    Args:
        t: Tensor of order at least 3 (any mode order)
        r: Target rank, at most min(n_1, N_3) after sorting the dims
        seed: Seed for the xi weights
        xi_redraws: Redraws allowed on a degenerate spectrum

    Returns:
        Normalized CPDecomposition in the input's mode order
    """
    cp, result = sorted_pass(t, r, seed, xi_redraws)
    norm = hs_norm(t)
    if norm > 0:
        logger.info("Decomposed dims %s at rank %d: relative residual %.3e", t.dims, r,
                    hs_norm(t - cp.expand()) / norm)
    return cp


def assemble_reshaped(parts: CPDecomposition, plan: ReshapePlan, dims: Sequence[int], split) -> CPDecomposition:
    """
    Map an order-3 decomposition of a reshaped tensor back to order m.

    Args:
        parts: Decomposition of reshape3(t, plan)
        plan: The reshape plan
        dims: Original dims
        split: Callable (w, group_dims, s, group) -> list of mode vectors

    Returns:
        CPDecomposition of order len(dims), not normalized
    """
    r = parts.rank
    factors = [np.zeros((n, r), dtype=np.complex128) for n in dims]
    for group, w in zip(plan.groups, parts.factors):
        group_dims = [dims[i] for i in group]
        for s in range(r):
            if len(group) == 1:
                vectors = [w[:, s]]
            else:
                vectors = split(w[:, s], group_dims, s, group)
            for mode, vector in zip(group, vectors):
                factors[mode][:, s] = vector
    return CPDecomposition(tuple(factors))


def _exact_split(w: np.ndarray, group_dims: List[int], s: int, group: Tuple[int, ...]) -> List[np.ndarray]:
    vectors, relative = kron_split(w, group_dims)
    if relative > KRON_SPLIT_TOL:
        raise ReshapeFactorizationError(
            f"Reshaped vector {s} for modes {list(group)} is not a Kronecker product "
            f"(relative residual {relative:.3e})",
            s=s, group=list(group), relative_residual=relative)
    return vectors


def decompose_reshaped(t: DenseTensor, r: int, seed: int = 0,
                       xi_redraws: int = DEFAULT_XI_REDRAWS) -> CPDecomposition:
    """
    Rank-r decomposition through an order-3 reshaping of the modes.

    Args:
        t: Tensor of order at least 3
        r: Target rank within the chosen plan's uniqueness bound
        seed: Seed for the xi weights
        xi_redraws: Redraws allowed on a degenerate spectrum

    Returns:
        Normalized CPDecomposition in the input's mode order
    """
    if t.order < 3:
        raise InvalidPlanError("Reshaping needs a tensor of order at least 3", order=t.order)
    plan = choose_reshape_plan(t.dims, r)
    parts = decompose(reshape3(t, plan), r, seed, xi_redraws)
    return normalize_cp(assemble_reshaped(parts, plan, t.dims, _exact_split))
