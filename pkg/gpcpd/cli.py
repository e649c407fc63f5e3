"""
Command-line interface: rank estimation, decompositions, approximations and benchmarks.
"""

import json
import logging
import sys
from typing import Any, Dict, List, Optional

import click
import numpy as np

from .algorithms import run_method
from .bench.runner import BenchConfig, run_bench
from .core.output import generate_results_summary, save_results_to_json, tensor_summary, to_jsonable
from .core.parser import read_tensor, write_factors
from .exceptions import NumericalError, TensorError
from .utils.config_validator import load_config_from_file, validate_bench_config, validate_method_config

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


def _parse_list(value: Optional[str], kind, name: str) -> Optional[List[Any]]:
    if value is None:
        return None
    try:
        return [kind(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a comma-separated list, got {value!r}", param_hint=name)


def _validated(method: str, params: Dict[str, Any]) -> Dict[str, Any]:
    is_valid, error, validated = validate_method_config(method, params)
    if not is_valid:
        raise click.UsageError(error)
    return validated


def _emit(payload: Dict[str, Any], as_json: bool, lines: List[str]) -> None:
    if as_json:
        click.echo(json.dumps(to_jsonable(payload), indent=2))
    else:
        for line in lines:
            click.echo(line)


def _run_and_report(method: str, file: str, params: Dict[str, Any], output: Optional[str],
                    report: Optional[str], as_json: bool) -> None:
    tensor = read_tensor(file)
    result = run_method(tensor, method, **_validated(method, params))
    if output:
        write_factors(output, result["factors"])
    summary = generate_results_summary(file, output, result)
    if report:
        save_results_to_json(summary, report)
    lines = [
        f"method: {method}",
        f"dims: {'x'.join(str(n) for n in tensor.dims)}",
        f"rank: {result['rank']}",
        f"residual: {result['resid']:.6e}",
        f"relative residual: {result['rel_resid']:.6e}",
    ]
    details = result["details"]
    if method == "approximate":
        lines.append(f"residual (gp): {details['resid_gp']:.6e}")
        if details["resid_opt"] is not None:
            lines.append(f"residual (opt): {details['resid_opt']:.6e} after {details['als_iters']} "
                         "ALS sweeps")
    if output:
        lines.append(f"factors written to {output}")
    _emit(summary, as_json, lines)


output_option = click.option("--output", "-o", type=click.Path(dir_okay=False),
                             help="Write the factors (cpfactors-v1) to this path.")
report_option = click.option("--report", type=click.Path(dir_okay=False),
                             help="Write the JSON report to this path.")
json_option = click.option("--json", "as_json", is_flag=True, help="Machine-readable JSON on stdout.")
rank_option = click.option("--rank", "-r", "rank", type=int, required=True, help="Target rank r.")
seed_option = click.option("--seed", type=int, default=0, show_default=True, help="Random seed.")
input_argument = click.argument("file", type=click.Path(exists=True, dir_okay=False))


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging.")
def cli(verbose: bool) -> None:
    """CP tensor decompositions by generating polynomials."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format=LOG_FORMAT)


@cli.command()
@input_argument
@click.option("--tol", type=float, default=1e-8, show_default=True,
              help="Relative singular value threshold.")
@json_option
def rank(file: str, tol: float, as_json: bool) -> None:
    """Estimate the CP rank from the most square flattening."""
    params = _validated("rank", {"tol": tol})
    info = tensor_summary(read_tensor(file), params["tol"])
    _emit(info, as_json, [str(info["estimated_rank"])])


@cli.command()
@input_argument
@rank_option
@seed_option
@click.option("--reshape", is_flag=True, help="Decompose through an order-3 reshaping.")
@output_option
@report_option
@json_option
def decompose(file: str, rank: int, seed: int, reshape: bool, output: Optional[str],
              report: Optional[str], as_json: bool) -> None:
    """Exact rank-r decomposition by generating polynomials."""
    _run_and_report("decompose", file, {"rank": rank, "seed": seed, "reshape": reshape},
                    output, report, as_json)


@cli.command()
@input_argument
@rank_option
@seed_option
@click.option("--refine", is_flag=True, help="Refine the generating-polynomial approximation.")
@click.option("--no-line-search", "no_line_search", is_flag=True,
              help="Plain ALS sweeps without the exact line search.")
@click.option("--recovery", type=click.Choice(["projection", "diagonal"]), default="projection",
              show_default=True, help="How the non-leading modes are recovered.")
@click.option("--max-iter", "max_iter", type=int, default=500, show_default=True,
              help="Maximum ALS sweeps.")
@click.option("--als-tol", "als_tol", type=float, default=1e-10, show_default=True,
              help="Relative decrease tolerance of the refinement.")
@click.option("--reshape", is_flag=True, help="Approximate through an order-3 reshaping.")
@output_option
@report_option
@json_option
def approximate(file: str, rank: int, seed: int, refine: bool, no_line_search: bool, recovery: str,
                max_iter: int, als_tol: float, reshape: bool, output: Optional[str], report: Optional[str],
                as_json: bool) -> None:
    """Rank-r approximation by generating polynomials."""
    params = {"rank": rank, "seed": seed, "refine": refine, "line_search": not no_line_search,
              "recovery": recovery, "max_als_iters": max_iter, "als_rel_tol": als_tol, "reshape": reshape}
    _run_and_report("approximate", file, params, output, report, as_json)


@cli.command()
@input_argument
@rank_option
@seed_option
@output_option
@report_option
@json_option
def gevd(file: str, rank: int, seed: int, output: Optional[str], report: Optional[str],
         as_json: bool) -> None:
    """Rank-r decomposition of an order-3 tensor by the GEVD method."""
    _run_and_report("gevd", file, {"rank": rank, "seed": seed}, output, report, as_json)


@cli.command()
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              help="JSON benchmark configuration; other options override it.")
@click.option("--dims", help="Comma-separated dimensions, e.g. 20,20,20.")
@click.option("--rank", "-r", "rank", type=int, help="Planted and target rank.")
@click.option("--eps", help="Comma-separated noise norms; 0 means an exact instance.")
@click.option("--trials", type=int, help="Instances per noise level.")
@click.option("--seed", type=int, help="Base seed; trial t uses seed + t.")
@click.option("--reshape", is_flag=True, default=None, help="Approximate through reshaping.")
@click.option("--method", type=click.Choice(["gp", "gevd", "both"]), help="Methods to run.")
@click.option("--no-refine", "no_refine", is_flag=True, default=None, help="Skip the refinement.")
@click.option("--workers", type=int, help="Worker threads.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write the report to this path.")
@json_option
def bench(config_file: Optional[str], dims: Optional[str], rank: Optional[int], eps: Optional[str],
          trials: Optional[int], seed: Optional[int], reshape: Optional[bool], method: Optional[str],
          no_refine: Optional[bool], workers: Optional[int], output: Optional[str], as_json: bool) -> None:
    """Run the perturbation benchmark."""
    config: Dict[str, Any] = {}
    if config_file:
        is_valid, error, config = load_config_from_file(config_file)
        if not is_valid:
            raise click.UsageError(error)
    overrides = {
        "dims": _parse_list(dims, int, "--dims"),
        "rank": rank,
        "eps": _parse_list(eps, float, "--eps"),
        "trials": trials,
        "seed": seed,
        "reshape": reshape,
        "method": method,
        "refine": False if no_refine else None,
        "workers": workers,
    }
    config.update({k: v for k, v in overrides.items() if v is not None})
    is_valid, error, validated = validate_bench_config(config)
    if not is_valid:
        raise click.UsageError(error)

    report = run_bench(BenchConfig(**validated)).to_dict()
    if output:
        save_results_to_json(report, output)

    lines = [f"{len(report['records'])} records, {len(report['failures'])} failures"]
    for cell in report["aggregates"]:
        rho = cell["median_rho_opt"] if cell["median_rho_opt"] is not None else cell["median_rho_gp"]
        rho_text = "n/a" if rho is None else f"{rho:.4f}"
        lines.append(
            f"{cell['method']:>4} dims={'x'.join(str(n) for n in cell['dims'])} r={cell['r']} "
            f"eps={cell['epsilon']:g} trials={cell['trials']} median_rho={rho_text} "
            f"median_rel_resid_gp={cell['median_rel_resid_gp']:.3e} "
            f"median_t_gp_ms={cell['median_t_gp_ms']:.1f}")
    _emit(report, as_json, lines)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address.")
@click.option("--port", type=click.IntRange(1, 65535), default=8000, show_default=True, help="Port.")
@click.option("--reload", is_flag=True, help="Restart on code changes.")
def serve(host: str, port: int, reload: bool) -> None:
    """Run the HTTP job service."""
    from .api.run import run_api

    run_api(host=host, port=port, reload=reload)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI and return its exit code.

    Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
    """
    try:
        rv = cli.main(args=argv, prog_name="gpcpd", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except NumericalError as e:
        click.echo(f"Numerical failure: {e.message}", err=True)
        click.echo(json.dumps(to_jsonable(e.to_dict())), err=True)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as e:
        click.echo(f"Numerical failure: {e}", err=True)
        return EXIT_NUMERICAL
    except TensorError as e:
        click.echo(f"Error: {e.message}", err=True)
        click.echo(json.dumps(to_jsonable(e.to_dict())), err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(cli_main())
