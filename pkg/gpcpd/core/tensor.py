"""
Dense complex tensors, CP decompositions and the basic operations on them.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from ..exceptions import KruskalGuardError, ShapeMismatchError

logger = logging.getLogger(__name__)

KRUSKAL_MAX_COLUMNS = 12
NUMERICAL_RANK_TOL = 1e-10
# A first entry below this fraction of the column norm is not used as pivot.
PIVOT_TOL = 1e-12


def _frozen(values, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=np.complex128, order="C", copy=True)
    if array.ndim != ndim:
        raise ShapeMismatchError(f"Expected a {ndim}-dimensional array, got shape {array.shape}",
                                 shape=list(array.shape))
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """
    Dense complex tensor of order m stored row-major (last index fastest).

    Attributes:
        dims: Dimensions (n_1, ..., n_m)
        data: Flat complex128 array of length prod(dims), read-only
    """

    dims: Tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if len(dims) < 1 or any(n < 1 for n in dims):
            raise ShapeMismatchError(f"Invalid tensor dimensions: {dims}", dims=list(dims))
        data = _frozen(np.ravel(self.data), 1)
        if data.size != int(np.prod(dims)):
            raise ShapeMismatchError(
                f"Data length {data.size} does not match product of dims {dims}",
                dims=list(dims), length=int(data.size))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, array) -> "DenseTensor":
        """Build a tensor from any array-like; its shape becomes ``dims``."""
        values = np.asarray(array, dtype=np.complex128)
        if values.ndim == 0:
            values = values.reshape(1)
        return cls(values.shape, values.ravel(order="C"))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "DenseTensor":
        return cls(tuple(dims), np.zeros(int(np.prod(dims)), dtype=np.complex128))

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def array(self) -> np.ndarray:
        """Read-only view shaped as ``dims``."""
        return self.data.reshape(self.dims)

    def __getitem__(self, index):
        return self.array[index]

    def __add__(self, other: "DenseTensor") -> "DenseTensor":
        _check_same_dims(self, other)
        return DenseTensor(self.dims, self.data + other.data)

    def __sub__(self, other: "DenseTensor") -> "DenseTensor":
        _check_same_dims(self, other)
        return DenseTensor(self.dims, self.data - other.data)

    def __mul__(self, scalar: complex) -> "DenseTensor":
        return DenseTensor(self.dims, self.data * scalar)

    __rmul__ = __mul__


def _check_same_dims(a: DenseTensor, b: DenseTensor) -> None:
    if a.dims != b.dims:
        raise ShapeMismatchError(f"Tensor dims differ: {a.dims} vs {b.dims}",
                                 left=list(a.dims), right=list(b.dims))


@dataclass(frozen=True, eq=False)
class CPDecomposition:
    """
    Rank-r CP model sum_s u^{s,1} x ... x u^{s,m}.

    Attributes:
        factors: Decomposing matrices U^(1), ..., U^(m); factor j is n_j x r
    """

    factors: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.factors) < 1:
            raise ShapeMismatchError("A CP decomposition needs at least one factor")
        factors = tuple(_frozen(f, 2) for f in self.factors)
        ranks = {f.shape[1] for f in factors}
        if len(ranks) != 1:
            raise ShapeMismatchError(
                f"Factors have different column counts: {[f.shape[1] for f in factors]}",
                columns=[f.shape[1] for f in factors])
        if any(f.shape[0] < 1 for f in factors):
            raise ShapeMismatchError("Every factor needs at least one row",
                                     rows=[f.shape[0] for f in factors])
        object.__setattr__(self, "factors", factors)

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def order(self) -> int:
        return len(self.factors)

    def column(self, s: int) -> List[np.ndarray]:
        """The vectors u^{s,1}, ..., u^{s,m} of the s-th rank-1 term."""
        return [f[:, s] for f in self.factors]

    def permute_modes(self, perm: Sequence[int]) -> "CPDecomposition":
        """Factors reordered so that new mode i is old mode ``perm[i]``."""
        return CPDecomposition(tuple(self.factors[p] for p in perm))

    def expand(self) -> DenseTensor:
        return expand(self)


def khatri_rao(matrices: Sequence[np.ndarray]) -> np.ndarray:
    """
    Column-wise Kronecker product, row-major (later matrices vary fastest).

    Args:
        matrices: Matrices sharing the same column count r

    Returns:
        Matrix of shape (prod of row counts) x r
    """
    r = matrices[0].shape[1]
    result = np.ones((1, r), dtype=np.complex128)
    for matrix in matrices:
        if matrix.shape[1] != r:
            raise ShapeMismatchError("Khatri-Rao factors need equal column counts",
                                     columns=[m.shape[1] for m in matrices])
        result = (result[:, None, :] * matrix[None, :, :]).reshape(result.shape[0] * matrix.shape[0], r)
    return result


def unfold(array: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding; columns run over the other modes row-major."""
    return np.moveaxis(array, mode, 0).reshape(array.shape[mode], -1)


def expand(cp: CPDecomposition) -> DenseTensor:
    """
    Evaluate a CP model as a dense tensor.

    Args:
        cp: CP decomposition with factors U^(1), ..., U^(m)

    Returns:
        Tensor whose entry (i_1, ..., i_m) is sum_s prod_j U^(j)[i_j, s]
    """
    first = cp.factors[0]
    if cp.rank == 0:
        return DenseTensor.zeros(cp.dims)
    if cp.order == 1:
        return DenseTensor.from_array(first.sum(axis=1))
    full = first @ khatri_rao(cp.factors[1:]).T
    return DenseTensor.from_array(full.reshape(cp.dims))


def hs_norm(t: DenseTensor) -> float:
    """Hilbert-Schmidt (Frobenius) norm of a tensor."""
    return float(np.linalg.norm(t.data))


def permute_modes(t: DenseTensor, perm: Sequence[int]) -> DenseTensor:
    """Transpose a tensor so that new mode i is old mode ``perm[i]``."""
    return DenseTensor.from_array(np.transpose(t.array, tuple(perm)))


def descending_mode_order(dims: Sequence[int]) -> Tuple[int, ...]:
    """Stable permutation sorting the dimensions in decreasing order."""
    return tuple(sorted(range(len(dims)), key=lambda j: -dims[j]))


def inverse_permutation(perm: Sequence[int]) -> Tuple[int, ...]:
    return tuple(int(i) for i in np.argsort(perm))


def mode_product(v: np.ndarray, mode: int, t: DenseTensor) -> DenseTensor:
    """
    Matrix-tensor product ``v x_mode t``: every mode fiber is multiplied by v.

    Args:
        v: Matrix with n_mode columns
        mode: 0-based mode index
        t: Input tensor

    Returns:
        Tensor whose mode dimension is replaced by the row count of v
    """
    v = np.asarray(v, dtype=np.complex128)
    if not 0 <= mode < t.order:
        raise ShapeMismatchError(f"Mode {mode} out of range for order {t.order}", mode=mode, order=t.order)
    if v.ndim != 2 or v.shape[1] != t.dims[mode]:
        raise ShapeMismatchError(
            f"Matrix of shape {v.shape} cannot act on mode {mode} of dimension {t.dims[mode]}",
            matrix_shape=list(v.shape), mode=mode, mode_dim=t.dims[mode])
    product = np.tensordot(v, t.array, axes=(1, mode))
    return DenseTensor.from_array(np.moveaxis(product, 0, mode))


def numerical_rank(matrix: np.ndarray, rel_tol: float = NUMERICAL_RANK_TOL) -> int:
    """Number of singular values above ``rel_tol`` times the largest one."""
    if matrix.size == 0:
        return 0
    sigma = linalg.svdvals(matrix)
    if sigma[0] == 0:
        return 0
    return int(np.sum(sigma > rel_tol * sigma[0]))


def kruskal_rank(a: np.ndarray) -> int:
    """
    Largest k such that every k columns of ``a`` are linearly independent.

    Subsets are enumerated exhaustively, so the column count is limited to
    KRUSKAL_MAX_COLUMNS.

    Args:
        a: Complex matrix

    Returns:
        The Kruskal rank
    """
    a = np.asarray(a, dtype=np.complex128)
    ncols = a.shape[1]
    if ncols > KRUSKAL_MAX_COLUMNS:
        raise KruskalGuardError(
            f"Matrix with {ncols} columns is too large for exact Kruskal rank",
            columns=ncols, limit=KRUSKAL_MAX_COLUMNS)
    for k in range(1, ncols + 1):
        for subset in itertools.combinations(range(ncols), k):
            if numerical_rank(a[:, subset]) < k:
                return k - 1
    return ncols


def kruskal_uniqueness(cp: CPDecomposition) -> Dict[str, Union[int, bool]]:
    """
    Kruskal's criterion 2r + 2 <= k_1 + k_2 + k_3 for an order-3 decomposition.

    Returns:
        Dictionary with the three Kruskal ranks, the rank and the verdict
    """
    if cp.order != 3:
        raise ShapeMismatchError("Kruskal's criterion applies to order-3 decompositions", order=cp.order)
    kappas = [kruskal_rank(f) for f in cp.factors]
    return {
        "kappa_1": kappas[0],
        "kappa_2": kappas[1],
        "kappa_3": kappas[2],
        "rank": cp.rank,
        "unique": 2 * cp.rank + 2 <= sum(kappas),
    }


def normalize_cp(cp: CPDecomposition) -> CPDecomposition:
    """
    Scale every column of modes 1.. to have first entry 1, absorbing the scale into mode 0.

    When the first entry is negligible against the column norm, the largest
    modulus entry is used as pivot instead.
    """
    factors = [np.array(f) for f in cp.factors]
    for s in range(cp.rank):
        for j in range(1, cp.order):
            col = factors[j][:, s]
            norm = np.linalg.norm(col)
            if norm == 0:
                continue
            pivot = 0 if abs(col[0]) > PIVOT_TOL * norm else int(np.argmax(np.abs(col)))
            scale = col[pivot]
            factors[j][:, s] = col / scale
            factors[0][:, s] = factors[0][:, s] * scale
    return CPDecomposition(tuple(factors))


def _reference_pivots(cp: CPDecomposition) -> np.ndarray:
    # (order - 1) x r indices of the largest-modulus entry of each column of modes 1..
    return np.array([np.argmax(np.abs(f), axis=0) for f in cp.factors[1:]], dtype=int).reshape(-1, cp.rank)


def _scaled_term(cp: CPDecomposition, s: int, pivots: np.ndarray) -> Optional[List[np.ndarray]]:
    """Term s with modes 1.. divided by their entries at ``pivots`` and the scale moved to mode 0."""
    columns = [cp.factors[0][:, s]]
    weight = 1.0 + 0.0j
    for j, pivot in enumerate(pivots, start=1):
        col = cp.factors[j][:, s]
        scale = col[pivot]
        if scale == 0:
            return None
        columns.append(col / scale)
        weight *= scale
    columns[0] = columns[0] * weight
    return columns


def _is_zero_term(cp: CPDecomposition, s: int) -> bool:
    return any(not np.any(f[:, s]) for f in cp.factors)


def _term_distance(a_cols: Optional[List[np.ndarray]], b_cols: List[np.ndarray]) -> float:
    if a_cols is None:
        return np.inf
    worst = 0.0
    for fa, fb in zip(a_cols, b_cols):
        scale = max(float(np.max(np.abs(fb))), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(fa - fb))) / scale)
    return worst


def cp_equivalent(a: CPDecomposition, b: CPDecomposition, tol: float) -> bool:
    """
    Check two decompositions agree up to column permutation and scaling.

    Each pair of terms is compared after scaling both at the same entries: the
    largest-modulus entry of each column of the reference ``b`` in modes 1..,
    with the scale absorbed into mode 0. The best matching of terms is found
    with the Hungarian method and entries are compared against ``tol`` times
    the largest modulus of the reference column.

    Args:
        a: First decomposition
        b: Reference decomposition
        tol: Relative entrywise tolerance

    Returns:
        True if the decompositions are equivalent
    """
    if a.dims != b.dims or a.rank != b.rank:
        return False
    if a.rank == 0:
        return True
    pivots = _reference_pivots(b)
    r = a.rank
    cost = np.empty((r, r))
    for t in range(r):
        reference = _scaled_term(b, t, pivots[:, t])
        for s in range(r):
            if reference is None:
                cost[s, t] = 0.0 if _is_zero_term(a, s) else np.inf
            else:
                cost[s, t] = _term_distance(_scaled_term(a, s, pivots[:, t]), reference)
    # any distance this large fails every sensible tolerance
    rows, cols = linear_sum_assignment(np.minimum(cost, 1e6))
    for s, t in zip(rows, cols):
        if not cost[s, t] <= tol:
            logger.debug("Column %d vs %d differs by %.3e beyond tolerance %g", s, t, cost[s, t], tol)
            return False
    return True
