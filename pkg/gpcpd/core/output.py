"""
Report generation for decomposition runs.
"""

import json
import math
import os
from datetime import datetime
from typing import Any, Dict, Optional

import numpy as np

from .flattening import DEFAULT_RANK_TOL, estimate_rank, flattening_singular_values, plan_flattening
from .parser import factors_to_dict
from .tensor import CPDecomposition, DenseTensor, hs_norm

LEADING_SINGULAR_VALUES = 10


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays, complex numbers and CP models to JSON values."""
    if isinstance(value, CPDecomposition):
        return factors_to_dict(value)
    if isinstance(value, dict):
        return {str(k) if not isinstance(k, str) else k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def tensor_summary(t: DenseTensor, rank_tol: float = DEFAULT_RANK_TOL) -> Dict[str, Any]:
    """
    Describe a tensor: dims, norm, flattening and estimated rank.

    Args:
        t: Tensor
        rank_tol: Relative singular value threshold for the rank estimate

    Returns:
        Dictionary with tensor information
    """
    info: Dict[str, Any] = {
        "dims": list(t.dims),
        "order": t.order,
        "norm": hs_norm(t),
        "estimated_rank": estimate_rank(t, rank_tol),
        "rank_tol": rank_tol,
        "singular_values": flattening_singular_values(t, LEADING_SINGULAR_VALUES).tolist(),
    }
    if t.order >= 2:
        plan = plan_flattening(t.dims)
        info["flattening"] = {"group1": list(plan.group1), "group2": list(plan.group2),
                              "shape": list(plan.shape)}
    return info


def generate_results_summary(input_file: str,
                             output_file: Optional[str],
                             run_result: Dict[str, Any],
                             tensor: Optional[DenseTensor] = None) -> Dict[str, Any]:
    """
    Generate a summary of a decomposition run.

    Args:
        input_file: Path to the input tensor file
        output_file: Path to the written factors file, if any
        run_result: Dictionary returned by ``run_method``
        tensor: The input tensor, to include its description

    Returns:
        Dictionary with summary information
    """
    details = {k: v for k, v in run_result.get("details", {}).items() if k != "x_gp"}
    summary = {
        "timestamp": datetime.now().isoformat(),
        "input_file": {
            "path": input_file,
            "name": os.path.basename(input_file),
        },
        "output_file": {
            "path": output_file,
            "name": os.path.basename(output_file) if output_file else None,
        },
        "method": run_result["method"],
        "rank": run_result["rank"],
        "resid": run_result["resid"],
        "rel_resid": run_result["rel_resid"],
        "timings_ms": run_result["timings_ms"],
        "details": details,
    }
    if tensor is not None:
        summary["input_file"].update(tensor_summary(tensor))
    return to_jsonable(summary)


def save_results_to_json(summary: Dict[str, Any], output_json: str) -> None:
    """
    Save a summary dictionary to a JSON file.

    Args:
        summary: Results summary dictionary
        output_json: Path to output JSON file
    """
    with open(output_json, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(summary), f, indent=2)
