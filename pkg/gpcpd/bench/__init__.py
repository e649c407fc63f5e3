"""
Planted instances and the perturbation benchmark harness.
"""

from .random import GaussianStream
from .instances import (
    PerturbationInstance,
    gen_instance,
    sqrt_sum_tensor,
    arctan_tensor,
    load_fixture,
    load_fixture_factors,
)
from .runner import BenchConfig, BenchRecord, BenchReport, run_bench, run_trial
