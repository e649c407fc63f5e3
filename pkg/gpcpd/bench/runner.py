"""
Perturbation benchmark: planted instances, approximation runs and per-cell aggregates.
"""

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from ..algorithms.approximate import ApproxOptions, approximate, approximate_reshaped
from ..algorithms.gevd import gevd_decompose
from ..core.statistics import aggregate_records, relative_errors
from ..core.tensor import hs_norm
from ..exceptions import TensorError
from .instances import PerturbationInstance, gen_instance

logger = logging.getLogger(__name__)

REPORT_FORMAT = "benchreport-v1"
SCHEMA_PATH = Path(__file__).resolve().parent.parent / "schemas" / f"{REPORT_FORMAT}.json"


class BenchConfig(BaseModel):
    """Benchmark grid: one planted instance per (epsilon, trial)."""
    dims: List[int] = Field(min_length=3)
    rank: int = Field(ge=1)
    eps: List[float] = Field(default_factory=lambda: [0.0])
    trials: int = Field(default=10, ge=0)
    seed: int = 0
    reshape: bool = False
    method: Literal["gp", "gevd", "both"] = "gp"
    refine: bool = True
    line_search: bool = True
    recovery: Literal["projection", "diagonal"] = "projection"
    max_als_iters: int = Field(default=500, gt=0)
    als_rel_tol: float = Field(default=1e-10, gt=0)
    workers: int = Field(default=1, ge=1)

    @field_validator("dims")
    @classmethod
    def _positive_dims(cls, dims: List[int]) -> List[int]:
        if any(n < 1 for n in dims):
            raise ValueError("dimensions must be positive")
        return dims

    @field_validator("eps")
    @classmethod
    def _nonnegative_eps(cls, eps: List[float]) -> List[float]:
        if any(e < 0 for e in eps):
            raise ValueError("noise levels must be nonnegative")
        return eps

    def methods(self) -> List[str]:
        return ["gp", "gevd"] if self.method == "both" else [self.method]


class BenchRecord(BaseModel):
    """Metrics of one method on one instance; rho values are None for exact instances."""
    dims: List[int]
    r: int
    epsilon: float
    seed: int
    trial: int
    method: str
    rho_gp: Optional[float]
    rho_opt: Optional[float]
    t_gp_ms: float
    t_opt_ms: Optional[float]
    resid_gp: float
    resid_opt: Optional[float]
    rel_resid_gp: float
    rel_resid_opt: Optional[float]


class BenchFailure(BaseModel):
    dims: List[int]
    r: int
    epsilon: float
    seed: int
    trial: int
    method: str
    error: str
    message: str
    details: Dict[str, Any] = Field(default_factory=dict)


class BenchReport(BaseModel):
    """Report of a benchmark run (format benchreport-v1)."""
    format: Literal["benchreport-v1"] = REPORT_FORMAT
    config: BenchConfig
    records: List[BenchRecord] = Field(default_factory=list)
    failures: List[BenchFailure] = Field(default_factory=list)
    aggregates: List[Dict[str, Any]] = Field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(self.model_dump_json())


def load_report_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _ratio(resid: Optional[float], e_norm: float) -> Optional[float]:
    if resid is None or e_norm == 0:
        return None
    return resid / e_norm


def _run_gp(inst: PerturbationInstance, config: BenchConfig) -> Dict[str, Any]:
    opts = ApproxOptions(seed=inst.seed, refine=config.refine, line_search=config.line_search,
                         recovery=config.recovery, max_als_iters=config.max_als_iters,
                         als_rel_tol=config.als_rel_tol, reshape=config.reshape)
    solver = approximate_reshaped if config.reshape else approximate
    result = solver(inst.F, config.rank, opts)
    if inst.epsilon > 0:
        rho_gp, resid_gp = relative_errors(inst.F, result.x_gp, inst.epsilon)
    else:
        rho_gp, resid_gp = None, result.resid_gp
    return {
        "rho_gp": rho_gp,
        "rho_opt": _ratio(result.resid_opt, inst.epsilon),
        "t_gp_ms": result.timings["gp"],
        "t_opt_ms": result.timings["opt"] if result.x_opt is not None else None,
        "resid_gp": resid_gp,
        "resid_opt": result.resid_opt,
    }


def _run_gevd(inst: PerturbationInstance, config: BenchConfig) -> Dict[str, Any]:
    start = time.perf_counter()
    cp = gevd_decompose(inst.F, config.rank, inst.seed)
    elapsed = (time.perf_counter() - start) * 1000
    resid = hs_norm(inst.F - cp.expand())
    return {
        "rho_gp": _ratio(resid, inst.epsilon),
        "rho_opt": None,
        "t_gp_ms": elapsed,
        "t_opt_ms": None,
        "resid_gp": resid,
        "resid_opt": None,
    }


RUNNERS = {"gp": _run_gp, "gevd": _run_gevd}


def run_trial(config: BenchConfig, epsilon: float, trial: int) -> Tuple[List[BenchRecord], List[BenchFailure]]:
    """
    Generate one instance (seed = base seed + trial) and run every configured method on it.

    Returns:
        Tuple of (records, failures)
    """
    seed = config.seed + trial
    inst = gen_instance(config.dims, config.rank, epsilon, seed)
    norm = hs_norm(inst.F)
    common = {"dims": list(config.dims), "r": config.rank, "epsilon": float(epsilon),
              "seed": seed, "trial": trial}
    records, failures = [], []
    for method in config.methods():
        try:
            metrics = RUNNERS[method](inst, config)
        except TensorError as e:
            logger.warning("Trial %d (epsilon=%g) failed for %s: %s", trial, epsilon, method, e.message)
            failures.append(BenchFailure(**common, method=method, error=type(e).__name__,
                                         message=e.message, details=_jsonable(e.details)))
            continue
        except Exception as e:
            logger.warning("Trial %d (epsilon=%g) failed for %s: %s", trial, epsilon, method, e)
            failures.append(BenchFailure(**common, method=method, error=type(e).__name__, message=str(e)))
            continue
        metrics["rel_resid_gp"] = _relative(metrics["resid_gp"], norm)
        metrics["rel_resid_opt"] = _relative(metrics["resid_opt"], norm)
        records.append(BenchRecord(**common, method=method, **metrics))
    return records, failures


def _relative(resid: Optional[float], norm: float) -> Optional[float]:
    if resid is None:
        return None
    return resid / norm if norm > 0 else 0.0


def _jsonable(details: Dict[str, Any]) -> Dict[str, Any]:
    return json.loads(json.dumps(details, default=str))


def run_bench(config: BenchConfig) -> BenchReport:
    """
    Run the benchmark grid of a configuration.

    Trials are independent and may run on ``config.workers`` threads; records
    are emitted in (epsilon, trial, method) order regardless of scheduling.

    Args:
        config: Benchmark configuration

    Returns:
        BenchReport with records, failures and per-cell medians and means
    """
    tasks = [(e_idx, eps, trial) for e_idx, eps in enumerate(config.eps) for trial in range(config.trials)]
    logger.info("Running %d benchmark instances for dims %s rank %d", len(tasks), config.dims, config.rank)

    def work(task):
        e_idx, eps, trial = task
        return (e_idx, trial), run_trial(config, eps, trial)

    if config.workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(work, tasks))
    else:
        outcomes = [work(task) for task in tasks]

    outcomes.sort(key=lambda item: item[0])
    records: List[BenchRecord] = []
    failures: List[BenchFailure] = []
    for _, (trial_records, trial_failures) in outcomes:
        records.extend(trial_records)
        failures.extend(trial_failures)

    aggregates = aggregate_records([rec.model_dump() for rec in records])
    return BenchReport(config=config, records=records, failures=failures, aggregates=aggregates)
