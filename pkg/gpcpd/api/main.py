"""
FastAPI application exposing decompositions, approximations and benchmarks as jobs.
"""

import logging
import os
import shutil
import uuid
from datetime import datetime
from pathlib import Path
from typing import Any, Dict

from fastapi import BackgroundTasks, FastAPI, File, HTTPException, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse

from .. import exceptions
from ..bench.runner import BenchConfig, run_bench
from ..core.output import save_results_to_json, tensor_summary, to_jsonable
from ..core.parser import read_tensor
from ..core.workflow import DecompositionWorkflow
from ..exceptions import NumericalError, TensorError
from .models import (
    ApproximateRequest, BenchRequest, DecomposeMethod, DecomposeRequest, JobStatus,
    JobStatusResponse, ResultResponse, RunResponse, UploadResponse,
)

logger = logging.getLogger(__name__)

app = FastAPI(
    title="gpcpd API",
    description="CP tensor decompositions and low-rank approximations by generating polynomials",
    version="1.0.0"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

BASE_DIR = Path(__file__).resolve().parent.parent.parent
UPLOAD_DIR = BASE_DIR / "data" / "uploads"
RESULTS_DIR = BASE_DIR / "data" / "results"

# Job tracking
active_jobs: Dict[str, Dict[str, Any]] = {}


@app.exception_handler(NumericalError)
async def numerical_error_handler(request: Request, exc: NumericalError):
    return JSONResponse(status_code=422, content=to_jsonable(exc.to_dict()))


@app.exception_handler(TensorError)
async def tensor_error_handler(request: Request, exc: TensorError):
    return JSONResponse(status_code=400, content=to_jsonable(exc.to_dict()))


def error_status(error_type: str) -> int:
    """HTTP status for a failed job, from the name of the error that stopped it."""
    error_class = getattr(exceptions, error_type or "", None)
    if isinstance(error_class, type) and issubclass(error_class, NumericalError):
        return 422
    if isinstance(error_class, type) and issubclass(error_class, TensorError):
        return 400
    return 500


def get_job_info(job_id: str) -> Dict[str, Any]:
    """Get information about a job"""
    if job_id not in active_jobs:
        raise HTTPException(status_code=404, detail=f"Job {job_id} not found")
    return active_jobs[job_id]


def new_job(**fields: Any) -> Dict[str, Any]:
    job_id = str(uuid.uuid4())[:8]
    active_jobs[job_id] = {
        "job_id": job_id,
        "created": datetime.now().isoformat(),
        "status": JobStatus.PENDING,
        "message": "",
        "results": None,
        "error": None,
        **fields,
    }
    return active_jobs[job_id]


@app.get("/")
async def root():
    """Root endpoint"""
    return {"message": "Welcome to the gpcpd API"}


@app.post("/upload", response_model=UploadResponse)
async def upload_file(
    background_tasks: BackgroundTasks,
    file: UploadFile = File(...),
):
    """
    Upload a ctensor-v1 file for analysis and decomposition
    """
    UPLOAD_DIR.mkdir(parents=True, exist_ok=True)
    job_info = new_job(kind="tensor", filename=file.filename, message="File uploaded successfully")
    job_id = job_info["job_id"]
    file_path = UPLOAD_DIR / f"{job_id}_{Path(file.filename).name}"

    try:
        with open(file_path, "wb") as buffer:
            shutil.copyfileobj(file.file, buffer)
    except OSError as e:
        logger.error("File upload failed: %s", e)
        del active_jobs[job_id]
        raise HTTPException(status_code=500, detail=f"File upload failed: {str(e)}")

    job_info["file_path"] = str(file_path)
    background_tasks.add_task(analyze_uploaded_file, job_id, file_path)

    return UploadResponse(
        job_id=job_id,
        filename=file.filename,
        status=JobStatus.PENDING,
        message="File uploaded successfully and queued for analysis"
    )


def analyze_uploaded_file(job_id: str, file_path: Path) -> None:
    """Background task: parse the tensor and describe its flattening spectrum"""
    if job_id not in active_jobs:
        logger.warning("Job %s disappeared before analysis", job_id)
        return

    job_info = active_jobs[job_id]
    job_info["status"] = JobStatus.PROCESSING
    job_info["message"] = "Analyzing tensor..."

    try:
        job_info["tensor_info"] = tensor_summary(read_tensor(str(file_path)))
    except TensorError as e:
        logger.info("Upload %s rejected: %s", job_id, e.message)
        job_info["status"] = JobStatus.FAILED
        job_info["message"] = f"Analysis failed: {e.message}"
        job_info["error"] = {"error": e.message, "error_type": type(e).__name__, "details": e.details}
        return
    except Exception as e:
        logger.exception("Analysis of job %s failed", job_id)
        job_info["status"] = JobStatus.FAILED
        job_info["message"] = f"Analysis failed: {str(e)}"
        return

    job_info["status"] = JobStatus.COMPLETED
    job_info["message"] = "Analysis completed"


@app.get("/jobs/{job_id}", response_model=JobStatusResponse)
async def get_job_status(job_id: str):
    """
    Get the status of a job
    """
    job_info = get_job_info(job_id)

    return JobStatusResponse(
        job_id=job_id,
        status=job_info["status"],
        progress=job_info.get("progress"),
        message=job_info["message"],
        tensor_info=to_jsonable(job_info.get("tensor_info"))
    )


def start_workflow(job_id: str, method: str, params: Dict[str, Any],
                   background_tasks: BackgroundTasks) -> RunResponse:
    job_info = get_job_info(job_id)

    if job_info.get("kind") != "tensor":
        raise HTTPException(status_code=400, detail="Job has no uploaded tensor")
    if job_info["status"] == JobStatus.PROCESSING or not job_info.get("tensor_info"):
        raise HTTPException(status_code=400, detail="Analysis must be completed before decomposition")

    workflow = DecompositionWorkflow(input_file=job_info["file_path"], output_dir=str(RESULTS_DIR))
    success, error = workflow.configure_from_dict(method, params)
    if not success:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {error}")

    job_info["status"] = JobStatus.PROCESSING
    job_info["message"] = f"{method} started"
    job_info["progress"] = 0.0
    job_info["results"] = None
    job_info["error"] = None

    background_tasks.add_task(run_workflow_job, job_id, workflow)

    return RunResponse(job_id=job_id, status=JobStatus.PROCESSING, message=f"{method} started")


def run_workflow_job(job_id: str, workflow: DecompositionWorkflow) -> None:
    """Background task to run a decomposition workflow"""
    if job_id not in active_jobs:
        return

    job_info = active_jobs[job_id]
    try:
        job_info["progress"] = 25.0
        results = workflow.run()
        job_info["progress"] = 100.0
    except Exception as e:
        logger.exception("Job %s failed", job_id)
        job_info["status"] = JobStatus.FAILED
        job_info["message"] = f"Decomposition failed: {str(e)}"
        job_info["error"] = {"error": str(e), "error_type": type(e).__name__}
        return

    if "error" in results:
        job_info["status"] = JobStatus.FAILED
        job_info["message"] = results["error"]
        job_info["error"] = results
        return

    job_info["status"] = JobStatus.COMPLETED
    job_info["message"] = f"{workflow.method} completed successfully"
    job_info["results"] = results


@app.post("/decompose/{job_id}", response_model=RunResponse)
async def execute_decompose(job_id: str, request: DecomposeRequest, background_tasks: BackgroundTasks):
    """
    Exact rank-r decomposition of the uploaded tensor
    """
    if request.method == DecomposeMethod.GEVD:
        if request.reshape:
            raise HTTPException(status_code=400, detail="The GEVD method does not support reshaping")
        return start_workflow(job_id, "gevd", {"rank": request.rank, "seed": request.seed},
                              background_tasks)
    return start_workflow(job_id, "decompose",
                          {"rank": request.rank, "seed": request.seed, "reshape": request.reshape},
                          background_tasks)


@app.post("/approximate/{job_id}", response_model=RunResponse)
async def execute_approximate(job_id: str, request: ApproximateRequest, background_tasks: BackgroundTasks):
    """
    Rank-r approximation of the uploaded tensor
    """
    params = request.model_dump()
    return start_workflow(job_id, "approximate", params, background_tasks)


@app.post("/bench", response_model=RunResponse)
async def execute_bench(request: BenchRequest, background_tasks: BackgroundTasks):
    """
    Run the perturbation benchmark as a job
    """
    job_info = new_job(kind="bench", message="Benchmark queued")
    background_tasks.add_task(run_bench_job, job_info["job_id"], BenchConfig(**request.model_dump()))
    return RunResponse(job_id=job_info["job_id"], status=JobStatus.PENDING, message="Benchmark queued")


def run_bench_job(job_id: str, config: BenchConfig) -> None:
    """Background task to run a benchmark"""
    if job_id not in active_jobs:
        return

    job_info = active_jobs[job_id]
    job_info["status"] = JobStatus.PROCESSING
    job_info["message"] = "Benchmark running"

    try:
        report = run_bench(config).to_dict()
        RESULTS_DIR.mkdir(parents=True, exist_ok=True)
        report_file = RESULTS_DIR / f"bench_{job_id}.json"
        save_results_to_json(report, str(report_file))
    except Exception as e:
        logger.exception("Benchmark job %s failed", job_id)
        job_info["status"] = JobStatus.FAILED
        job_info["message"] = f"Benchmark failed: {str(e)}"
        job_info["error"] = {"error": str(e), "error_type": type(e).__name__}
        return

    job_info["status"] = JobStatus.COMPLETED
    job_info["message"] = (f"Benchmark completed: {len(report['records'])} records, "
                           f"{len(report['failures'])} failures")
    job_info["results"] = {"output_file": str(report_file), "bench_report": to_jsonable(report)}


@app.get("/results/{job_id}", response_model=ResultResponse)
async def get_results(job_id: str):
    """
    Get the results of a job
    """
    job_info = get_job_info(job_id)

    if job_info["status"] == JobStatus.FAILED and job_info.get("error"):
        error = to_jsonable(job_info["error"])
        return JSONResponse(
            status_code=error_status(error.get("error_type")),
            content=ResultResponse(job_id=job_id, status=JobStatus.FAILED, error=error,
                                   message=job_info["message"]).model_dump(mode="json"),
        )

    results = job_info.get("results")
    if job_info["status"] != JobStatus.COMPLETED or not results:
        return ResultResponse(job_id=job_id, status=job_info["status"], message=job_info["message"])

    download_url = f"/download/{job_id}/{Path(results['output_file']).name}"

    if "bench_report" in results:
        return ResultResponse(
            job_id=job_id,
            status=JobStatus.COMPLETED,
            bench_report=results["bench_report"],
            download_url=download_url,
            message=job_info["message"]
        )

    summary = results["summary"]
    return ResultResponse(
        job_id=job_id,
        status=JobStatus.COMPLETED,
        summary={
            "method": summary["method"],
            "rank": summary["rank"],
            "resid": summary["resid"],
            "rel_resid": summary["rel_resid"],
            "timings_ms": summary["timings_ms"],
            "details": summary["details"],
            "timestamp": summary["timestamp"],
        },
        download_url=download_url,
        message=job_info["message"]
    )


@app.get("/download/{job_id}/{file_name}")
async def download_file(job_id: str, file_name: str):
    """
    Download a factors file or report produced by a job
    """
    job_info = get_job_info(job_id)

    results = job_info.get("results")
    if not results:
        raise HTTPException(status_code=404, detail="No results available for this job")

    candidates = [results.get("output_file"), results.get("report_file")]
    matches = [path for path in candidates if path and Path(path).name == file_name]
    if not matches or not os.path.exists(matches[0]):
        raise HTTPException(status_code=404, detail="Output file not found")

    return FileResponse(
        path=matches[0],
        filename=file_name,
        media_type="application/json"
    )


@app.delete("/jobs/{job_id}")
async def delete_job(job_id: str):
    """
    Delete a job and its associated files
    """
    job_info = get_job_info(job_id)

    paths = [job_info.get("file_path")]
    if job_info.get("results"):
        paths += [job_info["results"].get("output_file"), job_info["results"].get("report_file")]
    for path in paths:
        if path and os.path.exists(path):
            os.remove(path)

    del active_jobs[job_id]

    return {"message": f"Job {job_id} deleted successfully"}
