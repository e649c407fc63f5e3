"""
Workflow manager for file-to-file decomposition runs.
"""

from typing import Dict, Any, Optional, Tuple
import logging
import os
import uuid
from datetime import datetime

from ..algorithms import run_method
from ..exceptions import NumericalError, TensorError
from ..utils.config_validator import validate_method_config
from .output import generate_results_summary, save_results_to_json
from .parser import read_tensor, write_factors

logger = logging.getLogger(__name__)

RUNNABLE_METHODS = ("decompose", "approximate", "gevd")


class DecompositionWorkflow:
    """Manager for decomposition workflows on tensor files."""

    def __init__(self, input_file: str, output_dir: Optional[str] = None):
        """
        Initialize a decomposition workflow.

        Args:
            input_file: Path to input ctensor-v1 file
            output_dir: Directory for output files (default: same as input)
        """
        if not os.path.exists(input_file):
            raise FileNotFoundError(f"Input file not found: {input_file}")

        self.input_file = input_file
        self.input_name = os.path.basename(input_file)
        self.input_dir = os.path.dirname(input_file)

        self.output_dir = output_dir if output_dir else self.input_dir
        os.makedirs(self.output_dir, exist_ok=True)

        self.job_id = str(uuid.uuid4())[:8]
        self.method: Optional[str] = None
        self.params: Dict[str, Any] = {}

    def configure_from_dict(self, method: str, params: Dict[str, Any]) -> Tuple[bool, Optional[str]]:
        """
        Configure the method and its parameters.

        Args:
            method: One of "decompose", "approximate", "gevd"
            params: Method parameters

        Returns:
            Tuple of (success, error_message)
        """
        if method not in RUNNABLE_METHODS:
            return False, f"Method {method} cannot run in a workflow"
        is_valid, error, validated = validate_method_config(method, params)
        if not is_valid:
            return False, error

        self.method = method
        self.params = validated
        return True, None

    def run(self) -> Dict[str, Any]:
        """
        Run the configured method on the input file.

        Returns:
            Dictionary with workflow results, or an ``error`` entry on failure
        """
        if self.method is None:
            return {"error": "Workflow has not been configured"}

        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        output_prefix = f"{os.path.splitext(self.input_name)[0]}_{self.method}_{self.job_id}"
        output_factors = os.path.join(self.output_dir, f"{output_prefix}_factors.json")
        output_json = os.path.join(self.output_dir, f"{output_prefix}_report.json")

        try:
            tensor = read_tensor(self.input_file)
        except TensorError as e:
            return {"error": f"Error reading input file: {e.message}", "error_type": type(e).__name__}
        except Exception as e:
            return {"error": f"Error reading input file: {str(e)}"}

        try:
            result = run_method(tensor, self.method, **self.params)
        except NumericalError as e:
            logger.warning("Numerical failure in %s: %s", self.method, e.message)
            return {"error": f"Numerical failure: {e.message}", "error_type": type(e).__name__,
                    "details": e.details}
        except TensorError as e:
            return {"error": f"Invalid input: {e.message}", "error_type": type(e).__name__,
                    "details": e.details}

        try:
            write_factors(output_factors, result["factors"])
        except Exception as e:
            return {"error": f"Error writing factors file: {str(e)}"}

        try:
            summary = generate_results_summary(self.input_file, output_factors, result, tensor)
            summary["job_id"] = self.job_id
            summary["started"] = timestamp
            save_results_to_json(summary, output_json)
        except Exception as e:
            return {
                "error": f"Error generating summary: {str(e)}",
                "output_file": output_factors,
            }

        return {
            "job_id": self.job_id,
            "output_file": output_factors,
            "report_file": output_json,
            "resid": result["resid"],
            "rel_resid": result["rel_resid"],
            "summary": summary,
        }
