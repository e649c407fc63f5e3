"""
Configuration validation for method parameters.
"""

from typing import Dict, Any, Optional, Tuple
import json
import os


# Define valid parameter ranges for the different methods
METHOD_PARAMS = {
    "rank": {
        "tol": {"type": "float", "min": 0, "max": 1, "exclusive": True, "default": 1e-8}
    },
    "decompose": {
        "rank": {"type": "int", "min": 1, "required": True},
        "seed": {"type": "int", "default": 0},
        "xi_redraws": {"type": "int", "min": 0, "max": 100, "default": 5},
        "reshape": {"type": "bool", "default": False}
    },
    "approximate": {
        "rank": {"type": "int", "min": 1, "required": True},
        "seed": {"type": "int", "default": 0},
        "xi_redraws": {"type": "int", "min": 0, "max": 100, "default": 5},
        "refine": {"type": "bool", "default": False},
        "line_search": {"type": "bool", "default": True},
        "recovery": {"type": "str", "choices": ["projection", "diagonal"], "default": "projection"},
        "max_als_iters": {"type": "int", "min": 1, "max": 100000, "default": 500},
        "als_rel_tol": {"type": "float", "min": 0, "max": 1, "exclusive": True, "default": 1e-10},
        "reshape": {"type": "bool", "default": False}
    },
    "gevd": {
        "rank": {"type": "int", "min": 1, "required": True},
        "seed": {"type": "int", "default": 0}
    },
    "bench": {
        "dims": {"type": "int_list", "min": 1, "min_items": 3, "required": True},
        "rank": {"type": "int", "min": 1, "required": True},
        "eps": {"type": "float_list", "min": 0, "default": [0.0]},
        "trials": {"type": "int", "min": 0, "default": 10},
        "seed": {"type": "int", "default": 0},
        "reshape": {"type": "bool", "default": False},
        "method": {"type": "str", "choices": ["gp", "gevd", "both"], "default": "gp"},
        "refine": {"type": "bool", "default": True},
        "line_search": {"type": "bool", "default": True},
        "recovery": {"type": "str", "choices": ["projection", "diagonal"], "default": "projection"},
        "max_als_iters": {"type": "int", "min": 1, "max": 100000, "default": 500},
        "als_rel_tol": {"type": "float", "min": 0, "max": 1, "exclusive": True, "default": 1e-10},
        "workers": {"type": "int", "min": 1, "max": 64, "default": 1}
    }
}


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_scalar(name: str, value: Any, config: Dict[str, Any]) -> Tuple[Optional[str], Any]:
    kind = config.get("type")
    if kind in ("int", "int_list"):
        if not _is_number(value) or not float(value).is_integer():
            return f"Parameter {name} must be an integer", None
        value = int(value)
    elif kind in ("float", "float_list"):
        if not _is_number(value):
            return f"Parameter {name} must be a number", None
        value = float(value)
    elif kind == "bool":
        if not isinstance(value, bool):
            return f"Parameter {name} must be a boolean", None
    elif kind == "str":
        if not isinstance(value, str):
            return f"Parameter {name} must be a string", None
        if "choices" in config and value not in config["choices"]:
            return f"Parameter {name} must be one of {config['choices']}", None

    # Range validation
    if kind != "bool" and _is_number(value):
        if config.get("exclusive"):
            if "min" in config and value <= config["min"]:
                return f"Parameter {name} must be > {config['min']}", None
            if "max" in config and value >= config["max"]:
                return f"Parameter {name} must be < {config['max']}", None
        else:
            if "min" in config and value < config["min"]:
                return f"Parameter {name} must be >= {config['min']}", None
            if "max" in config and value > config["max"]:
                return f"Parameter {name} must be <= {config['max']}", None
    return None, value


def validate_method_config(method: str, params: Dict[str, Any]) -> Tuple[bool, Optional[str], Dict[str, Any]]:
    """
    Validate the parameters of a method.

    Args:
        method: Method name
        params: Parameters for the method

    Returns:
        Tuple of (is_valid, error_message, validated_params)
    """
    if method not in METHOD_PARAMS:
        return False, f"Unknown method: {method}", {}

    method_params = METHOD_PARAMS[method]
    validated_params = {}

    # Check for required parameters
    for param_name, param_config in method_params.items():
        if param_config.get("required", False) and params.get(param_name) is None:
            return False, f"Missing required parameter: {param_name}", {}

    for param_name, param_value in params.items():
        if param_name not in method_params:
            return False, f"Unknown parameter for method {method}: {param_name}", {}
        if param_value is None:
            continue

        param_config = method_params[param_name]
        if param_config.get("type", "").endswith("_list"):
            if not isinstance(param_value, (list, tuple)):
                return False, f"Parameter {param_name} must be a list", {}
            if len(param_value) < param_config.get("min_items", 0):
                return False, f"Parameter {param_name} needs at least {param_config['min_items']} items", {}
            items = []
            for item in param_value:
                error, item = _check_scalar(param_name, item, param_config)
                if error:
                    return False, error, {}
                items.append(item)
            validated_params[param_name] = items
        else:
            error, value = _check_scalar(param_name, param_value, param_config)
            if error:
                return False, error, {}
            validated_params[param_name] = value

    # Add defaults for missing optional parameters
    for param_name, param_config in method_params.items():
        if param_name not in validated_params and "default" in param_config:
            default = param_config["default"]
            validated_params[param_name] = list(default) if isinstance(default, list) else default

    return True, None, validated_params


def validate_bench_config(config: Any) -> Tuple[bool, Optional[str], Dict[str, Any]]:
    """
    Validate a complete benchmark configuration.

    Args:
        config: Benchmark configuration dictionary

    Returns:
        Tuple of (is_valid, error_message, validated_config)
    """
    if not isinstance(config, dict):
        return False, "Benchmark configuration must be a dictionary", {}
    return validate_method_config("bench", config)


def load_config_from_file(config_path: str) -> Tuple[bool, Optional[str], Dict[str, Any]]:
    """
    Load and validate a benchmark configuration from a JSON file.

    Args:
        config_path: Path to the configuration JSON file

    Returns:
        Tuple of (is_valid, error_message, validated_config)
    """
    if not os.path.exists(config_path):
        return False, f"Configuration file not found: {config_path}", {}

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            config = json.load(f)
    except Exception as e:
        return False, f"Error loading configuration file: {str(e)}", {}

    return validate_bench_config(config)
