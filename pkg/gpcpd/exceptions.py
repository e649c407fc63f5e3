"""
Structured errors raised by the tensor library.

Every error carries a ``details`` dictionary with the quantities that caused
it, so the CLI and the HTTP service can report them without parsing messages.
"""

from typing import Any, Dict, Optional


class TensorError(ValueError):
    """Base class for all library errors."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        """Serializable form used by the CLI ``--json`` mode and the API."""
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


class ShapeMismatchError(TensorError):
    """Dimensions of the inputs do not agree."""


class InvalidPlanError(TensorError):
    """A flattening or reshaping plan is not a valid partition of the modes."""


class RankBoundError(TensorError):
    """The requested rank lies outside the range an algorithm supports."""

    def __init__(self, message: str, bound: str, rank: int, limit: Optional[int] = None, **details: Any):
        super().__init__(message, bound=bound, rank=rank, limit=limit, **details)
        self.bound = bound


class KruskalGuardError(TensorError):
    """Exact Kruskal rank requested for a matrix with too many columns."""


class ParameterError(TensorError):
    """A numeric option lies outside its admissible range."""

    def __init__(self, message: str, name: str, value: Any, **details: Any):
        super().__init__(message, name=name, value=value, **details)
        self.name = name


class FormatError(TensorError):
    """A tensor or factor file is malformed."""

    def __init__(self, message: str, path: Optional[str] = None, offset: Optional[int] = None, **details: Any):
        super().__init__(message, path=path, offset=offset, **details)
        self.path = path
        self.offset = offset


class NumericalError(TensorError):
    """Base class for failures of the numerical algorithms themselves."""


class RankDeficientError(NumericalError):
    """A coefficient matrix that must have full column rank does not."""

    def __init__(self, message: str, j: int, numerical_rank: int, required: int, **details: Any):
        super().__init__(message, j=j, numerical_rank=numerical_rank, required=required, **details)
        self.j = j
        self.numerical_rank = numerical_rank


class DegenerateSpectrumError(NumericalError):
    """The combined generating matrix has (numerically) repeated eigenvalues."""


class ReshapeFactorizationError(NumericalError):
    """A reshaped decomposing vector is not a Kronecker product of mode vectors."""


class PencilError(NumericalError):
    """The GEVD matrix pencil is singular or too ill-conditioned."""
