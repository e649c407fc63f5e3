"""
Low-rank approximation by generating polynomials with ALS refinement.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, Field

from ..core.flattening import choose_reshape_plan, reshape3
from ..core.tensor import CPDecomposition, DenseTensor, hs_norm, khatri_rao, normalize_cp, unfold
from ..exceptions import InvalidPlanError, RankDeficientError, ShapeMismatchError
from .decompose import DEFAULT_XI_REDRAWS, assemble_reshaped, sorted_pass
from .linalg import leading_vectors, rank1_matrix, solve_least_squares

logger = logging.getLogger(__name__)

RIDGE_FACTOR = 1e-12
# ALS stops once ||F - X|| <= this fraction of ||F||.
ALS_RESIDUAL_FLOOR = 1e-13
# Line-search steps are sampled on [-1, 2] and accepted up to this length.
MAX_STEP = 1000.0


class ApproxOptions(BaseModel):
    """Options of the approximation algorithms."""
    seed: int = 0
    refine: bool = False
    recovery: Literal["projection", "diagonal"] = "projection"
    line_search: bool = True
    max_als_iters: int = Field(default=500, gt=0)
    als_rel_tol: float = Field(default=1e-10, gt=0)
    xi_redraws: int = Field(default=DEFAULT_XI_REDRAWS, ge=0)
    reshape: bool = False


@dataclass(frozen=True, eq=False)
class AlsTrace:
    """
    Outcome of an ALS run.

    Attributes:
        cp: Final decomposition
        iters: Number of full sweeps
        history: Objective ||F - X||^2 before the first sweep and after every sweep
        ridge_events: (sweep, mode) pairs where the ridge-regularized solve was used
        line_search_steps: Sweeps whose line-search step was kept
    """

    cp: CPDecomposition
    iters: int
    history: List[float]
    ridge_events: List[Tuple[int, int]]
    line_search_steps: int = 0


@dataclass(frozen=True, eq=False)
class ApproxResult:
    """
    Result of a low-rank approximation.

    Attributes:
        x_gp: Generating-polynomial approximation
        x_opt: ALS-refined approximation (None unless refinement ran)
        resid_gp: ||F - x_gp||
        resid_opt: ||F - x_opt|| (None unless refinement ran)
        als_iters: Number of ALS sweeps
        timings: Wall-clock milliseconds per phase ("gp", "opt")
        diagnostics: Off-diagonal mass, block residuals, ALS history and related data
    """

    x_gp: CPDecomposition
    x_opt: Optional[CPDecomposition]
    resid_gp: float
    resid_opt: Optional[float]
    als_iters: int = 0
    timings: Dict[str, float] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def best(self) -> CPDecomposition:
        return self.x_opt if self.x_opt is not None else self.x_gp


def _objective(t: DenseTensor, factors: List[np.ndarray]) -> float:
    return hs_norm(t - CPDecomposition(tuple(factors)).expand()) ** 2


def _moved(factors: List[np.ndarray], direction: List[np.ndarray], step: float) -> List[np.ndarray]:
    return [f + step * d for f, d in zip(factors, direction)]


def line_search_step(t: DenseTensor, factors: List[np.ndarray], direction: List[np.ndarray]) -> float:
    """
    Real step a minimizing ||F - X(U + a D)||^2.

    The objective is a polynomial of degree 2m in a. It is recovered from 2m + 1
    samples on [-1, 2] and minimized over its real critical points in
    (-1, MAX_STEP].

    Returns:
        The minimizing step, or 0.0 for a zero direction or when no critical
        point lies in range
    """
    if not any(np.any(d) for d in direction):
        return 0.0
    degree = 2 * t.order
    samples = np.linspace(-1.0, 2.0, degree + 1)
    values = [_objective(t, _moved(factors, direction, a)) for a in samples]
    poly = Polynomial.fit(samples, values, degree)
    critical = poly.deriv().roots()
    real = critical[np.abs(critical.imag) <= 1e-8 * np.maximum(1.0, np.abs(critical))].real
    real = real[(real > -1.0) & (real <= MAX_STEP) & (real != 0.0)]
    if real.size == 0:
        return 0.0
    return float(real[np.argmin(poly(real))])


def als_sweeps(t: DenseTensor, init: CPDecomposition, max_iters: int, rel_tol: float,
               line_search: bool = True) -> AlsTrace:
    """
    Alternating least squares on ||F - sum_s u^{s,1} (x) ... (x) u^{s,m}||^2.

    Each sweep re-solves every factor in turn against the Khatri-Rao product of
    the others. Ill-conditioned solves switch to a ridge of 1e-12 ||KR||^2.
    From the second sweep on, the factors are also moved along the sweep's
    update by the exact line-search step, which is kept when it lowers the
    objective.

    Args:
        t: Tensor to approximate
        init: Starting decomposition with dims equal to t.dims
        max_iters: Maximum number of sweeps
        rel_tol: Stop when the relative objective decrease falls below this
        line_search: Search along the update after every sweep

    Returns:
        AlsTrace
    """
    if init.dims != t.dims:
        raise ShapeMismatchError(f"Initial decomposition dims {init.dims} differ from tensor dims {t.dims}",
                                 init=list(init.dims), tensor=list(t.dims))
    factors = [np.array(f, dtype=np.complex128) for f in init.factors]
    floor = (ALS_RESIDUAL_FLOOR * hs_norm(t)) ** 2
    history = [_objective(t, factors)]
    ridge_events: List[Tuple[int, int]] = []
    searched = 0
    iters = 0
    for sweep in range(1, max_iters + 1):
        before = [f.copy() for f in factors]
        for n in range(t.order):
            kr = khatri_rao([factors[i] for i in range(t.order) if i != n])
            rhs = unfold(t.array, n).T
            result = solve_least_squares(kr, rhs, ridge=RIDGE_FACTOR * np.linalg.norm(kr) ** 2)
            if result.method == "ridge":
                ridge_events.append((sweep, n))
                logger.warning("ALS sweep %d mode %d ill-conditioned (%.3e), using ridge", sweep, n,
                               result.condition)
            factors[n] = result.solution.T
        current = _objective(t, factors)
        if line_search and sweep > 1 and current > floor:
            direction = [f - b for f, b in zip(factors, before)]
            step = line_search_step(t, factors, direction)
            if step != 0.0:
                moved = _moved(factors, direction, step)
                value = _objective(t, moved)
                if value < current:
                    factors, current = moved, value
                    searched += 1
        iters = sweep
        history.append(current)
        previous = history[-2]
        logger.debug("ALS sweep %d objective %.6e", sweep, current)
        if current <= floor:
            break
        if previous > 0 and (previous - current) / previous < rel_tol:
            break
    return AlsTrace(CPDecomposition(tuple(factors)), iters, history, ridge_events, searched)


def refine_als(t: DenseTensor, init: CPDecomposition, opts: Optional[ApproxOptions] = None
               ) -> Tuple[CPDecomposition, int, List[Tuple[int, int]]]:
    """
    Refine a decomposition by ALS.

    Returns:
        Tuple of (normalized decomposition, number of sweeps, (sweep, mode) ridge events)
    """
    opts = opts or ApproxOptions()
    trace = als_sweeps(t, init, opts.max_als_iters, opts.als_rel_tol, opts.line_search)
    return normalize_cp(trace.cp), trace.iters, trace.ridge_events


def _refined(t: DenseTensor, x_gp: CPDecomposition, opts: ApproxOptions, diagnostics: Dict[str, Any]
             ) -> Tuple[Optional[CPDecomposition], Optional[float], int, float]:
    if not opts.refine:
        return None, None, 0, 0.0
    start = time.perf_counter()
    trace = als_sweeps(t, x_gp, opts.max_als_iters, opts.als_rel_tol, opts.line_search)
    elapsed = (time.perf_counter() - start) * 1000
    x_opt = normalize_cp(trace.cp)
    diagnostics["als_history"] = trace.history
    diagnostics["ridge_events"] = trace.ridge_events
    diagnostics["line_search_steps"] = trace.line_search_steps
    return x_opt, hs_norm(t - x_opt.expand()), trace.iters, elapsed


def approximate(t: DenseTensor, r: int, opts: Optional[ApproxOptions] = None) -> ApproxResult:
    """
    Rank-r approximation by the generating-polynomial method.

    The blocks Y_jk are least-squares solutions and the common eigenvectors of
    a random combination give the leading mode-1 rows. The other modes come
    from projecting F[:r] onto those eigenvectors (``opts.recovery`` =
    "projection") or from the diagonals of the similarity-transformed blocks
    ("diagonal"). With ``opts.refine`` the result is polished by
    ALS.

    Args:
        t: Tensor of order at least 3
        r: Target rank, at most min(n_1, N_3) after sorting the dims
        opts: Approximation options

    Returns:
        ApproxResult
    """
    opts = opts or ApproxOptions()
    start = time.perf_counter()
    x_gp, result = sorted_pass(t, r, opts.seed, opts.xi_redraws, opts.recovery)
    t_gp = (time.perf_counter() - start) * 1000
    diagnostics: Dict[str, Any] = {
        "recovery": opts.recovery,
        "offdiag_mass": result.offdiag_mass,
        "block_residuals": result.residuals,
        "xi_attempts": result.attempts,
        "min_eig_gap": result.eig.min_eig_gap,
        "eigvec_condition": result.eig.condition,
    }
    resid_gp = hs_norm(t - x_gp.expand())
    x_opt, resid_opt, iters, t_opt = _refined(t, x_gp, opts, diagnostics)
    logger.info("Rank-%d approximation of dims %s: resid_gp %.4e resid_opt %s", r, t.dims, resid_gp,
                "n/a" if resid_opt is None else f"{resid_opt:.4e}")
    return ApproxResult(x_gp, x_opt, resid_gp, resid_opt, iters,
                        timings={"gp": t_gp, "opt": t_opt}, diagnostics=diagnostics)


def _leading_rank1(t: DenseTensor) -> CPDecomposition:
    vectors = leading_vectors(t.array)
    core = t.array
    for v in vectors:
        core = np.tensordot(v.conj(), core, axes=(0, 0))
    vectors[0] = vectors[0] * core
    trace = als_sweeps(t, CPDecomposition(tuple(v.reshape(-1, 1) for v in vectors)),
                       ApproxOptions().max_als_iters, ApproxOptions().als_rel_tol)
    return normalize_cp(trace.cp)


def rank1_approx(t: DenseTensor) -> CPDecomposition:
    """
    Rank-1 approximation of a tensor of any order.

    Order 1 returns the vector itself, order 2 the dominant singular triple,
    higher orders the ALS-refined generating-polynomial approximation. The zero
    tensor gives zero factors, and when the generating-polynomial blocks are
    singular ALS starts from the leading singular vectors of the unfoldings.
    """
    if t.order == 1:
        return CPDecomposition((t.data.reshape(-1, 1),))
    if hs_norm(t) == 0:
        return CPDecomposition(tuple(np.zeros((n, 1), dtype=np.complex128) for n in t.dims))
    if t.order == 2:
        u, v, _ = rank1_matrix(t.array)
        return normalize_cp(CPDecomposition((u.reshape(-1, 1), v.reshape(-1, 1))))
    try:
        return approximate(t, 1, ApproxOptions(refine=True)).best
    except RankDeficientError as e:
        logger.info("Rank-1 generating-polynomial pass failed (%s), starting ALS from leading singular vectors",
                    e.message)
        return _leading_rank1(t)


def _approximate_split(split_residuals: List[float]):
    def split(w: np.ndarray, group_dims: List[int], s: int, group: Tuple[int, ...]) -> List[np.ndarray]:
        norm = np.linalg.norm(w)
        if len(group_dims) == 2:
            u, v, residual = rank1_matrix(w.reshape(group_dims))
            vectors = [u, v]
        else:
            block = DenseTensor.from_array(w.reshape(group_dims))
            cp = rank1_approx(block)
            vectors = [f[:, 0] for f in cp.factors]
            residual = hs_norm(block - cp.expand())
        split_residuals.append(float(residual / norm) if norm > 0 else 0.0)
        return vectors
    return split


def approximate_reshaped(t: DenseTensor, r: int, opts: Optional[ApproxOptions] = None) -> ApproxResult:
    """
    Rank-r approximation through an order-3 reshaping of the modes.

    The order-3 reshape is approximated without refinement; each grouped
    vector is then replaced by its best rank-1 structure and the optional ALS
    refinement runs on the order-m factors.

    Args:
        t: Tensor of order at least 3
        r: Target rank within the chosen plan's uniqueness bound
        opts: Approximation options

    Returns:
        ApproxResult
    """
    if t.order < 3:
        raise InvalidPlanError("Reshaping needs a tensor of order at least 3", order=t.order)
    opts = opts or ApproxOptions()
    start = time.perf_counter()
    plan = choose_reshape_plan(t.dims, r)
    inner = approximate(reshape3(t, plan), r, opts.model_copy(update={"refine": False}))
    split_residuals: List[float] = []
    x_gp = normalize_cp(assemble_reshaped(inner.x_gp, plan, t.dims, _approximate_split(split_residuals)))
    t_gp = (time.perf_counter() - start) * 1000
    diagnostics: Dict[str, Any] = dict(inner.diagnostics)
    diagnostics["reshape_plan"] = [list(g) for g in plan.groups]
    diagnostics["reshape_sizes"] = list(plan.sizes)
    diagnostics["split_residuals"] = split_residuals
    resid_gp = hs_norm(t - x_gp.expand())
    x_opt, resid_opt, iters, t_opt = _refined(t, x_gp, opts, diagnostics)
    return ApproxResult(x_gp, x_opt, resid_gp, resid_opt, iters,
                        timings={"gp": t_gp, "opt": t_opt}, diagnostics=diagnostics)
