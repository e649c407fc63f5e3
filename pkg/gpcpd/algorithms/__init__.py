"""
Integration module for the decomposition and approximation algorithms.
"""

import time
from typing import Any, Dict

from ..core.tensor import DenseTensor, hs_norm

from .genpoly import (
    MonomialLabel,
    GenPolySystem,
    pairing,
    is_generating_poly,
    build_system,
    solve_blocks,
    eigen_relation_check,
)

from .decompose import (
    DEFAULT_XI_REDRAWS,
    EigenCombination,
    draw_xi,
    combine_and_diagonalize,
    extract_modes,
    solve_mode2,
    solve_mode1_tail,
    project_modes,
    decompose,
    decompose_reshaped,
)

from .approximate import (
    ApproxOptions,
    ApproxResult,
    approximate,
    approximate_reshaped,
    refine_als,
    rank1_approx,
)

from .gevd import GevdWorkspace, gevd_decompose


def run_method(t: DenseTensor, method: str, **kwargs) -> Dict[str, Any]:
    """
    Run a decomposition method on a tensor.

    Args:
        t: Input tensor
        method: Method to use
            - "decompose": Exact decomposition by generating polynomials
            - "gevd": Generalized eigenvalue baseline (order 3)
            - "approximate": Low-rank approximation with optional ALS refinement
        **kwargs: Validated parameters of the method (rank, seed, reshape, ...)

    Returns:
        Dictionary with the factors, residuals, timings and method details
    """
    r = kwargs["rank"]
    seed = kwargs.get("seed", 0)
    norm = hs_norm(t)
    start = time.perf_counter()

    if method == "decompose":
        solver = decompose_reshaped if kwargs.get("reshape", False) else decompose
        factors = solver(t, r, seed, kwargs.get("xi_redraws", DEFAULT_XI_REDRAWS))
        timings = {"total": (time.perf_counter() - start) * 1000}
        details: Dict[str, Any] = {"reshape": kwargs.get("reshape", False)}

    elif method == "gevd":
        factors = gevd_decompose(t, r, seed)
        timings = {"total": (time.perf_counter() - start) * 1000}
        details = {}

    elif method == "approximate":
        opts = ApproxOptions(
            seed=seed,
            refine=kwargs.get("refine", False),
            line_search=kwargs.get("line_search", True),
            recovery=kwargs.get("recovery", "projection"),
            max_als_iters=kwargs.get("max_als_iters", 500),
            als_rel_tol=kwargs.get("als_rel_tol", 1e-10),
            xi_redraws=kwargs.get("xi_redraws", DEFAULT_XI_REDRAWS),
            reshape=kwargs.get("reshape", False),
        )
        solver = approximate_reshaped if opts.reshape else approximate
        result = solver(t, r, opts)
        factors = result.best
        timings = dict(result.timings)
        timings["total"] = (time.perf_counter() - start) * 1000
        details = {
            "resid_gp": result.resid_gp,
            "resid_opt": result.resid_opt,
            "als_iters": result.als_iters,
            "diagnostics": result.diagnostics,
            "x_gp": result.x_gp,
        }

    else:
        raise ValueError(f"Unknown method: {method}")

    resid = hs_norm(t - factors.expand())
    return {
        "method": method,
        "rank": r,
        "factors": factors,
        "resid": resid,
        "rel_resid": resid / norm if norm > 0 else 0.0,
        "timings_ms": timings,
        "details": details,
    }
