"""
Module for approximation error metrics and benchmark aggregates.
"""

from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..exceptions import ParameterError
from .tensor import CPDecomposition, DenseTensor, hs_norm

# Record fields aggregated per (dims, r, epsilon, method) cell.
METRIC_FIELDS = ["rho_gp", "rho_opt", "t_gp_ms", "t_opt_ms", "resid_gp", "resid_opt",
                 "rel_resid_gp", "rel_resid_opt"]
CELL_FIELDS = ["dims", "r", "epsilon", "method"]


def relative_errors(f: DenseTensor, x: CPDecomposition, e_norm: float) -> Tuple[float, float]:
    """
    Residual of an approximation and its ratio to the noise norm.

    Args:
        f: Observed tensor
        x: Approximating decomposition
        e_norm: Norm of the planted noise, positive

    Returns:
        Tuple of (rho = resid / e_norm, resid = ||F - X||)
    """
    if not e_norm > 0:
        raise ParameterError(f"Noise norm must be positive, got {e_norm}", name="e_norm", value=e_norm)
    resid = hs_norm(f - x.expand())
    return resid / e_norm, resid


def _clean(value: Any) -> Optional[float]:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return None
    return float(value)


def aggregate_records(records: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """
    Medians and means of every metric per (dims, r, epsilon, method) cell.

    Args:
        records: Completed benchmark records

    Returns:
        One dictionary per cell with ``trials`` and ``median_<field>`` /
        ``mean_<field>`` entries (None when no value is defined)
    """
    if not records:
        return []
    frame = pd.DataFrame(records)
    frame["dims"] = frame["dims"].apply(lambda d: "x".join(str(n) for n in d))
    frame["epsilon"] = frame["epsilon"].astype(float)
    for name in METRIC_FIELDS:
        frame[name] = pd.to_numeric(frame[name], errors="coerce") if name in frame else np.nan

    grouped = frame.groupby(CELL_FIELDS, sort=True)
    medians = grouped[METRIC_FIELDS].median()
    means = grouped[METRIC_FIELDS].mean()
    counts = grouped.size()

    cells = []
    for key in counts.index:
        dims, r, epsilon, method = key
        cell: Dict[str, Any] = {
            "dims": [int(n) for n in dims.split("x")],
            "r": int(r),
            "epsilon": float(epsilon),
            "method": method,
            "trials": int(counts[key]),
        }
        for name in METRIC_FIELDS:
            cell[f"median_{name}"] = _clean(medians.loc[key, name])
            cell[f"mean_{name}"] = _clean(means.loc[key, name])
        cells.append(cell)
    return cells
