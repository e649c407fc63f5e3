"""
Generating polynomials of a tensor and the linear systems they satisfy.

A generating polynomial of F is a multilinear polynomial p with
<p q, F> = 0 for every complementary monomial q. For a rank-r tensor the
family

    sum_l G(i, j, k, l) x_{1,l} x_{j,1} - x_{1,i} x_{j,k}

gives, per mode j >= 3 and index k >= 2, a linear system A_j X = B_jk whose
solution Y_jk = X^T shares the eigenvectors (u^{s,1})_{1:r} of the
decomposition, with eigenvalues (u^{s,j})_k.

Modes are 0-based in code: the label set Upsilon is
{(j, k): 2 <= j < m, 1 <= k < n_j} and dims are expected in decreasing order.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from ..core.tensor import CPDecomposition, DenseTensor, hs_norm, normalize_cp, numerical_rank
from ..exceptions import RankBoundError, RankDeficientError, ShapeMismatchError
from .linalg import solve_least_squares

logger = logging.getLogger(__name__)

FULL_RANK_TOL = 1e-10

BlockLabel = Tuple[int, int]


@dataclass(frozen=True)
class MonomialLabel:
    """
    Monomial x_{1,i_1} ... x_{m,i_m} identified with a tensor position.

    ``indices[j]`` is the 1-based index i_j of mode j, or None when the
    monomial has no variable of that mode.
    """

    indices: Tuple[Optional[int], ...]

    @classmethod
    def full(cls, *indices: int) -> "MonomialLabel":
        return cls(tuple(int(i) for i in indices))

    @classmethod
    def partial(cls, order: int, variables: Mapping[int, int]) -> "MonomialLabel":
        """Monomial over a subset of modes, ``variables`` maps 0-based mode to 1-based index."""
        return cls(tuple(variables.get(j) for j in range(order)))

    @property
    def order(self) -> int:
        return len(self.indices)

    @property
    def support(self) -> frozenset:
        """0-based modes carrying a variable."""
        return frozenset(j for j, i in enumerate(self.indices) if i is not None)

    def __mul__(self, other: "MonomialLabel") -> "MonomialLabel":
        if self.order != other.order:
            raise ShapeMismatchError("Monomials of different orders cannot be multiplied",
                                     left=self.order, right=other.order)
        if self.support & other.support:
            raise ShapeMismatchError("Product would not be multilinear",
                                     modes=sorted(self.support & other.support))
        return MonomialLabel(tuple(a if a is not None else b for a, b in zip(self.indices, other.indices)))

    def position(self, dims: Tuple[int, ...]) -> Tuple[int, ...]:
        """0-based tensor position of a full monomial."""
        if len(dims) != self.order or None in self.indices:
            raise ShapeMismatchError(f"Monomial {self.indices} does not label an entry of a tensor of dims {dims}",
                                     label=list(self.indices), dims=list(dims))
        if any(not 1 <= i <= n for i, n in zip(self.indices, dims)):
            raise ShapeMismatchError(f"Monomial {self.indices} out of range for dims {dims}",
                                     label=list(self.indices), dims=list(dims))
        return tuple(i - 1 for i in self.indices)


Polynomial = Mapping[MonomialLabel, complex]


def multiply(p: Polynomial, q: Polynomial) -> Dict[MonomialLabel, complex]:
    """Product of two multilinear polynomials with disjoint mode supports."""
    product: Dict[MonomialLabel, complex] = {}
    for mu, a in p.items():
        for nu, b in q.items():
            label = mu * nu
            product[label] = product.get(label, 0) + a * b
    return product


def pairing(coeffs: Polynomial, t: DenseTensor) -> complex:
    """
    Bilinear product <p, F> = sum_mu c_mu F_mu.

    Args:
        coeffs: Coefficients keyed by full monomial labels
        t: Tensor

    Returns:
        The complex value of the pairing
    """
    total = 0j
    for label, c in coeffs.items():
        total += c * t.array[label.position(t.dims)]
    return complex(total)


def is_generating_poly(coeffs: Polynomial, J: Iterable[int], t: DenseTensor, tol: float) -> bool:
    """
    Check <p q, F> = 0 for every monomial q over the complementary modes.

    Args:
        coeffs: Polynomial supported on monomials over exactly the modes J
        J: 0-based mode subset
        t: Tensor
        tol: Tolerance relative to ||F||

    Returns:
        True iff every |<p q, F>| <= tol ||F||
    """
    J = frozenset(J)
    values = np.zeros([n for j, n in enumerate(t.dims) if j not in J], dtype=np.complex128)
    for label, c in coeffs.items():
        if label.order != t.order or label.support != J:
            raise ShapeMismatchError(f"Monomial {label.indices} is not supported on modes {sorted(J)}",
                                     label=list(label.indices), modes=sorted(J))
        index = tuple(slice(None) if i is None else i - 1 for i in label.indices)
        if any(i is not None and not 1 <= i <= n for i, n in zip(label.indices, t.dims)):
            raise ShapeMismatchError(f"Monomial {label.indices} out of range for dims {t.dims}",
                                     label=list(label.indices), dims=list(t.dims))
        values = values + c * t.array[index]
    worst = float(np.max(np.abs(values))) if values.size else 0.0
    return worst <= tol * hs_norm(t)


def upsilon(dims: Tuple[int, ...]) -> List[BlockLabel]:
    """Label set {(j, k): 2 <= j < m, 1 <= k < n_j}, 0-based."""
    return [(j, k) for j in range(2, len(dims)) for k in range(1, dims[j])]


def _n_j(dims: Tuple[int, ...], j: int) -> int:
    return int(np.prod(dims[1:])) // dims[j]


@dataclass(frozen=True, eq=False)
class GenPolySystem:
    """
    Coefficient blocks of the generating-polynomial equations.

    Attributes:
        dims: Tensor dimensions, decreasing
        rank: Target rank r
        upsilon: Block labels (j, k), 0-based
        A: Per mode j, the N_j x r matrix with entries F[l, mu] at index 0 of mode j
        B: Per (j, k), the N_j x r matrix with entries F[i, mu] at index k of mode j
        Y: Per (j, k), the solved r x r block (empty until solve_blocks)
        residuals: Per (j, k), ||A_j Y_jk^T - B_jk||
        methods: Per mode j, the least-squares route taken ("qr" or "svd")
    """

    dims: Tuple[int, ...]
    rank: int
    upsilon: Tuple[BlockLabel, ...]
    A: Dict[int, np.ndarray]
    B: Dict[BlockLabel, np.ndarray]
    Y: Dict[BlockLabel, np.ndarray] = field(default_factory=dict)
    residuals: Dict[BlockLabel, float] = field(default_factory=dict)
    methods: Dict[int, str] = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return len(self.Y) == len(self.upsilon)

    def block_sizes(self) -> Dict[int, int]:
        return {j: a.shape[0] for j, a in self.A.items()}


def check_rank_bounds(dims: Tuple[int, ...], r: int) -> None:
    """Raise RankBoundError unless 1 <= r <= n_1 and r <= N_3."""
    if len(dims) < 3:
        raise ShapeMismatchError("Generating polynomials need a tensor of order at least 3",
                                 order=len(dims))
    if r < 1:
        raise RankBoundError(f"Rank must be positive, got {r}", bound="positive", rank=r, limit=1)
    if r > dims[0]:
        raise RankBoundError(f"Rank {r} exceeds n_1 = {dims[0]}", bound="n_1", rank=r, limit=dims[0])
    n3 = _n_j(dims, 2)
    if r > n3:
        raise RankBoundError(f"Rank {r} exceeds N_3 = {n3}", bound="N_3", rank=r, limit=n3)


def _block(head: np.ndarray, j: int, k: int) -> np.ndarray:
    # head is F[:r]; rows run over the modes other than 0 and j, columns over l
    r = head.shape[0]
    return np.moveaxis(head.take(k, axis=j), 0, -1).reshape(-1, r)


def build_system(t: DenseTensor, r: int) -> GenPolySystem:
    """
    Assemble A_j and B_jk by indexing into F.

    Args:
        t: Tensor with decreasing dims and order at least 3
        r: Target rank

    Returns:
        GenPolySystem without solved blocks
    """
    check_rank_bounds(t.dims, r)
    head = t.array[:r]
    labels = upsilon(t.dims)
    A = {j: _block(head, j, 0) for j in range(2, t.order)}
    B = {(j, k): _block(head, j, k) for j, k in labels}
    logger.debug("Built generating-polynomial system for dims %s, r=%d, %d blocks",
                 t.dims, r, len(labels))
    return GenPolySystem(t.dims, r, tuple(labels), A, B)


def solve_blocks(sys: GenPolySystem) -> GenPolySystem:
    """
    Solve A_j Y_jk^T = B_jk in the least-squares sense for every (j, k).

    All right-hand sides of one mode j share a single factorization of A_j.

    Args:
        sys: System from build_system

    Returns:
        A new system with Y, residuals and methods filled in
    """
    r = sys.rank
    Y: Dict[BlockLabel, np.ndarray] = {}
    residuals: Dict[BlockLabel, float] = {}
    methods: Dict[int, str] = {}
    for j, a in sys.A.items():
        rank = numerical_rank(a, FULL_RANK_TOL)
        if rank < r:
            raise RankDeficientError(f"A_{j} has numerical rank {rank} < {r}",
                                     j=j, numerical_rank=rank, required=r)
        ks = [k for jj, k in sys.upsilon if jj == j]
        if not ks:
            continue
        rhs = np.hstack([sys.B[(j, k)] for k in ks])
        result = solve_least_squares(a, rhs)
        methods[j] = result.method
        for idx, k in enumerate(ks):
            x = result.solution[:, idx * r:(idx + 1) * r]
            Y[(j, k)] = x.T
            residuals[(j, k)] = float(np.linalg.norm(a @ x - sys.B[(j, k)]))
    if residuals:
        logger.debug("Block residuals: max %.3e", max(residuals.values()))
    return replace(sys, Y=Y, residuals=residuals, methods=methods)


def eigen_relation_check(sys: GenPolySystem, cp: CPDecomposition, tol: float) -> bool:
    """
    Check Y_jk (u^{s,1})_{1:r} = (u^{s,j})_k (u^{s,1})_{1:r} for all s and (j, k).

    The decomposition is normalized first so that (u^{s,j})_1 = 1 for j >= 2.

    Args:
        sys: Solved system
        cp: Decomposition in the same (decreasing) mode order as the system
        tol: Tolerance relative to ||(u^{s,1})_{1:r}||

    Returns:
        True iff every relation holds
    """
    if cp.dims != sys.dims or cp.rank != sys.rank:
        return False
    cp = normalize_cp(cp)
    r = sys.rank
    for s in range(r):
        head = cp.factors[0][:r, s]
        scale = np.linalg.norm(head)
        for j, k in sys.upsilon:
            gap = np.linalg.norm(sys.Y[(j, k)] @ head - cp.factors[j][k, s] * head)
            if gap > tol * scale:
                logger.debug("Eigen relation fails for s=%d, (j,k)=(%d,%d): %.3e", s, j, k, gap)
                return False
    return True
