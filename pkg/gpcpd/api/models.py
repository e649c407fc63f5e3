"""
Pydantic models for API request and response validation.
"""

from typing import Dict, Optional, Any
from enum import Enum
from pydantic import BaseModel, Field

from ..algorithms.approximate import ApproxOptions
from ..bench.runner import BenchConfig


class DecomposeMethod(str, Enum):
    """Available exact decomposition methods"""
    GP = "gp"
    GEVD = "gevd"


class DecomposeRequest(BaseModel):
    """Parameters of an exact decomposition"""
    method: DecomposeMethod = DecomposeMethod.GP
    rank: int = Field(ge=1)
    seed: int = 0
    reshape: bool = False


class ApproximateRequest(ApproxOptions):
    """Parameters of a low-rank approximation"""
    rank: int = Field(ge=1)


class BenchRequest(BenchConfig):
    """Benchmark configuration submitted as a job"""


class JobStatus(str, Enum):
    """Job status values"""
    PENDING = "pending"
    PROCESSING = "processing"
    COMPLETED = "completed"
    FAILED = "failed"


class UploadResponse(BaseModel):
    """Response for file upload endpoint"""
    job_id: str
    filename: str
    status: JobStatus
    message: str


class JobStatusResponse(BaseModel):
    """Response for job status endpoint"""
    job_id: str
    status: JobStatus
    progress: Optional[float] = None
    message: str
    tensor_info: Optional[Dict[str, Any]] = None


class RunResponse(BaseModel):
    """Response for decomposition, approximation and benchmark submissions"""
    job_id: str
    status: JobStatus
    message: str


class ResultSummary(BaseModel):
    """Summary of a decomposition run"""
    method: str
    rank: int
    resid: float
    rel_resid: float
    timings_ms: Dict[str, float]
    details: Dict[str, Any] = Field(default_factory=dict)
    timestamp: str


class ResultResponse(BaseModel):
    """Response for results endpoint"""
    job_id: str
    status: JobStatus
    summary: Optional[ResultSummary] = None
    bench_report: Optional[Dict[str, Any]] = None
    download_url: Optional[str] = None
    error: Optional[Dict[str, Any]] = None
    message: Optional[str] = None
