"""
Flattenings, rank estimation and order-3 reshaping of tensors.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..exceptions import InvalidPlanError, ParameterError, RankBoundError
from .tensor import DenseTensor, inverse_permutation

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class FlattenPlan:
    """Two-block grouping of the modes (0-based) and the resulting matrix shape."""

    group1: Tuple[int, ...]
    group2: Tuple[int, ...]
    rows: int
    cols: int

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)


@dataclass(frozen=True)
class ReshapePlan:
    """
    Partition I1 u I2 u I3 of the modes (0-based) with products p1 >= p2 >= p3.

    Attributes:
        I1, I2, I3: Mode groups, each sorted ascending
        p1, p2, p3: Products of the dimensions in each group
    """

    I1: Tuple[int, ...]
    I2: Tuple[int, ...]
    I3: Tuple[int, ...]
    p1: int
    p2: int
    p3: int

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]], dims: Sequence[int]) -> "ReshapePlan":
        """
        Build a plan from three mode groups, ordering them by decreasing product.

        Args:
            groups: Three disjoint, nonempty groups covering range(len(dims))
            dims: Tensor dimensions

        Returns:
            The reshape plan
        """
        blocks = [tuple(sorted(int(i) for i in g)) for g in groups]
        _check_partition(blocks, len(dims), parts=3)
        sized = sorted(((int(np.prod([dims[i] for i in b])), b) for b in blocks),
                       key=lambda item: -item[0])
        (p1, b1), (p2, b2), (p3, b3) = sized
        return cls(b1, b2, b3, p1, p2, p3)

    @property
    def groups(self) -> Tuple[Tuple[int, ...], ...]:
        return (self.I1, self.I2, self.I3)

    @property
    def sizes(self) -> Tuple[int, int, int]:
        return (self.p1, self.p2, self.p3)

    @property
    def delta(self) -> int:
        return self.p2 + self.p3 - self.p1 - 2

    @property
    def max_unique_rank(self) -> int:
        """Largest rank with a generically unique reshaped decomposition."""
        return self.p1 + min(self.delta // 2, self.delta)


def _check_partition(blocks: Sequence[Sequence[int]], order: int, parts: int) -> None:
    flat = [i for b in blocks for i in b]
    if len(blocks) != parts or any(len(b) == 0 for b in blocks):
        raise InvalidPlanError(f"Plan needs {parts} nonempty groups, got {list(blocks)}",
                               groups=[list(b) for b in blocks])
    if sorted(flat) != list(range(order)):
        raise InvalidPlanError(f"Groups {list(blocks)} do not partition modes 0..{order - 1}",
                               groups=[list(b) for b in blocks], order=order)


def _two_block_partitions(order: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    # mode 0 always sits in the first group
    for mask in range(1, 2 ** order):
        if not mask & 1 or mask == 2 ** order - 1:
            continue
        group1 = tuple(i for i in range(order) if mask >> i & 1)
        group2 = tuple(i for i in range(order) if not mask >> i & 1)
        yield group1, group2


def plan_flattening(dims: Sequence[int]) -> FlattenPlan:
    """
    Find the most square two-block flattening of the given dimensions.

    Ties in |rows - cols| go to the lexicographically smallest group containing
    mode 0.

    Args:
        dims: Tensor dimensions, at least two

    Returns:
        The flattening plan
    """
    if len(dims) < 2:
        raise InvalidPlanError("Flattening needs a tensor of order at least 2", order=len(dims))
    best: Optional[Tuple[int, Tuple[int, ...], FlattenPlan]] = None
    for group1, group2 in _two_block_partitions(len(dims)):
        rows = int(np.prod([dims[i] for i in group1]))
        cols = int(np.prod([dims[i] for i in group2]))
        key = (abs(rows - cols), group1)
        if best is None or key < best[:2]:
            best = (key[0], group1, FlattenPlan(group1, group2, rows, cols))
    return best[2]


def most_square_flatten(t: DenseTensor) -> Tuple[FlattenPlan, np.ndarray]:
    """
    Most square flattening matrix of a tensor.

    Args:
        t: Tensor of order at least 2

    Returns:
        Tuple of (plan, matrix of shape rows x cols)
    """
    plan = plan_flattening(t.dims)
    matrix = np.transpose(t.array, plan.group1 + plan.group2).reshape(plan.rows, plan.cols)
    return plan, matrix


def flattening_singular_values(t: DenseTensor, count: Optional[int] = None) -> np.ndarray:
    """
    Singular values of the most square flattening, in decreasing order.

    Args:
        t: Input tensor
        count: Number of leading values to return (all if None)

    Returns:
        Array of singular values
    """
    if t.order == 1:
        sigma = np.array([np.linalg.norm(t.data)])
    else:
        _, matrix = most_square_flatten(t)
        sigma = linalg.svdvals(matrix)
    return sigma if count is None else sigma[:count]


def estimate_rank(t: DenseTensor, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """
    Estimate the CP rank by the numerical rank of the most square flattening.

    Args:
        t: Input tensor
        rel_tol: Threshold on sigma_i / sigma_1, in (0, 1)

    Returns:
        Number of singular values above the threshold (0 for the zero tensor)
    """
    if not 0 < rel_tol < 1:
        raise ParameterError(f"rel_tol must lie in (0, 1), got {rel_tol}", name="rel_tol", value=rel_tol)
    sigma = flattening_singular_values(t)
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    rank = int(np.sum(sigma / sigma[0] > rel_tol))
    logger.debug("Flattening spectrum %s gives rank %d", sigma[: rank + 1], rank)
    return rank


def reshape3(t: DenseTensor, plan: ReshapePlan) -> DenseTensor:
    """
    Regroup the modes of a tensor into an order-3 tensor of dims (p1, p2, p3).

    Each grouped index is the row-major linearization of its modes, so rank-1
    terms map to Kronecker products of the mode vectors.

    Args:
        t: Tensor of order at least 3
        plan: Reshape plan for ``t.dims``

    Returns:
        The order-3 tensor
    """
    _check_plan_for(plan, t.dims)
    perm = plan.I1 + plan.I2 + plan.I3
    return DenseTensor.from_array(np.transpose(t.array, perm).reshape(plan.sizes))


def unreshape3(t3: DenseTensor, plan: ReshapePlan, dims: Sequence[int]) -> DenseTensor:
    """Inverse index map of :func:`reshape3`."""
    _check_plan_for(plan, dims)
    if t3.dims != plan.sizes:
        raise InvalidPlanError(f"Tensor dims {t3.dims} do not match plan sizes {plan.sizes}",
                               dims=list(t3.dims), sizes=list(plan.sizes))
    perm = plan.I1 + plan.I2 + plan.I3
    grouped = t3.array.reshape([dims[i] for i in perm])
    return DenseTensor.from_array(np.transpose(grouped, inverse_permutation(perm)))


def _check_plan_for(plan: ReshapePlan, dims: Sequence[int]) -> None:
    _check_partition(plan.groups, len(dims), parts=3)
    for group, size in zip(plan.groups, plan.sizes):
        if int(np.prod([dims[i] for i in group])) != size:
            raise InvalidPlanError(f"Group {group} does not have product {size} for dims {tuple(dims)}",
                                   group=list(group), size=size)


def three_block_partitions(order: int) -> List[Tuple[Tuple[int, ...], ...]]:
    """All partitions of range(order) into three nonempty groups."""
    seen = set()
    partitions = []
    for labels in itertools.product(range(3), repeat=order):
        if len(set(labels)) != 3:
            continue
        blocks = tuple(sorted(tuple(i for i in range(order) if labels[i] == b) for b in range(3)))
        if blocks not in seen:
            seen.add(blocks)
            partitions.append(blocks)
    return partitions


def choose_reshape_plan(dims: Sequence[int], r: int) -> ReshapePlan:
    """
    Pick a reshaping whose order-3 decomposition of rank r is generically unique.

    A plan is feasible when r <= max_unique_rank and r <= p2 (the rank bound of
    the order-3 decomposition). Among feasible plans the largest
    max_unique_rank wins; ties go to the lexicographically smallest groups.

    Args:
        dims: Tensor dimensions, order at least 3
        r: Target rank

    Returns:
        The chosen plan
    """
    if len(dims) < 3:
        raise InvalidPlanError("Reshaping needs a tensor of order at least 3", order=len(dims))
    best: Optional[ReshapePlan] = None
    best_key = None
    for blocks in three_block_partitions(len(dims)):
        plan = ReshapePlan.from_groups(blocks, dims)
        if plan.max_unique_rank < r or plan.p2 < r:
            continue
        key = (-plan.max_unique_rank, plan.groups)
        if best_key is None or key < best_key:
            best, best_key = plan, key
    if best is None:
        raise RankBoundError(f"Rank {r} too large for reshaping dims {tuple(dims)}",
                             bound="max_unique_rank", rank=r, dims=list(dims))
    logger.debug("Reshape plan %s sizes %s (max unique rank %d)", best.groups, best.sizes,
                 best.max_unique_rank)
    return best
