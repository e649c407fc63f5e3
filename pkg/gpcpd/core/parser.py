"""
Reading and writing tensors (ctensor-v1) and CP factors (cpfactors-v1) as JSON.
"""

import json
import logging
import os
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ..exceptions import FormatError
from .tensor import CPDecomposition, DenseTensor

logger = logging.getLogger(__name__)

TENSOR_FORMAT = "ctensor-v1"
FACTORS_FORMAT = "cpfactors-v1"

Pair = Tuple[float, float]
PathLike = Union[str, os.PathLike]


class TensorFile(BaseModel):
    """Schema of a ctensor-v1 document."""
    format: Literal["ctensor-v1"]
    dims: List[int] = Field(min_length=1)
    data: List[Pair]


class FactorsFile(BaseModel):
    """Schema of a cpfactors-v1 document; factors[j][s] is column s of mode j."""
    format: Literal["cpfactors-v1"]
    dims: List[int] = Field(min_length=1)
    rank: int = Field(ge=0)
    factors: List[List[List[Pair]]]


def _decode(raw: bytes, path: Optional[str]) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError(f"File is not valid UTF-8: {e.reason}", path=path, offset=e.start) from e


def _load_json(text: str, path: Optional[str]) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[:e.pos].encode("utf-8"))
        raise FormatError(f"Malformed JSON: {e.msg}", path=path, offset=offset) from e


def _validate(model, document: Any, expected_format: str, path: Optional[str]):
    if isinstance(document, dict) and document.get("format") != expected_format:
        raise FormatError(f"Expected format '{expected_format}', got {document.get('format')!r}",
                          path=path, expected=expected_format)
    try:
        return model.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise FormatError(f"Invalid {expected_format} document at '{where}': {first['msg']}",
                          path=path, errors=len(e.errors())) from e


def _to_complex(pairs: List[Pair]) -> np.ndarray:
    if not pairs:
        return np.zeros(0, dtype=np.complex128)
    values = np.ascontiguousarray(np.array(pairs, dtype=np.float64))
    return values.view(np.complex128).ravel()


def _to_pairs(values: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.ravel(values)]


def parse_tensor(text: str, path: Optional[str] = None) -> DenseTensor:
    """
    Parse a ctensor-v1 JSON document.

    Args:
        text: Document text
        path: Source path, used in error details

    Returns:
        DenseTensor
    """
    document = _validate(TensorFile, _load_json(text, path), TENSOR_FORMAT, path)
    if any(n < 1 for n in document.dims):
        raise FormatError(f"Dimensions must be positive: {document.dims}", path=path)
    expected = int(np.prod(document.dims))
    if len(document.data) != expected:
        raise FormatError(
            f"Data length {len(document.data)} does not match product of dims {expected}",
            path=path, dims=document.dims, length=len(document.data))
    return DenseTensor(tuple(document.dims), _to_complex(document.data))


def parse_factors(text: str, path: Optional[str] = None) -> CPDecomposition:
    """
    Parse a cpfactors-v1 JSON document.

    Args:
        text: Document text
        path: Source path, used in error details

    Returns:
        CPDecomposition
    """
    document = _validate(FactorsFile, _load_json(text, path), FACTORS_FORMAT, path)
    if len(document.factors) != len(document.dims):
        raise FormatError(f"Expected {len(document.dims)} factors, got {len(document.factors)}",
                          path=path)
    factors = []
    for j, (n, columns) in enumerate(zip(document.dims, document.factors)):
        if len(columns) != document.rank:
            raise FormatError(f"Factor {j} has {len(columns)} columns, expected rank {document.rank}",
                              path=path, factor=j)
        if any(len(col) != n for col in columns):
            raise FormatError(f"Factor {j} columns must have {n} entries", path=path, factor=j)
        matrix = np.zeros((n, document.rank), dtype=np.complex128)
        for s, col in enumerate(columns):
            matrix[:, s] = _to_complex(col)
        factors.append(matrix)
    return CPDecomposition(tuple(factors))


def tensor_to_dict(t: DenseTensor) -> Dict[str, Any]:
    return {"format": TENSOR_FORMAT, "dims": list(t.dims), "data": _to_pairs(t.data)}


def factors_to_dict(cp: CPDecomposition) -> Dict[str, Any]:
    return {
        "format": FACTORS_FORMAT,
        "dims": list(cp.dims),
        "rank": cp.rank,
        "factors": [[_to_pairs(f[:, s]) for s in range(cp.rank)] for f in cp.factors],
    }


def _read_text(path: PathLike) -> str:
    with open(path, "rb") as handle:
        return _decode(handle.read(), str(path))


def _write_json(path: PathLike, document: Dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle)


def read_tensor(path: PathLike) -> DenseTensor:
    """Read a ctensor-v1 file."""
    t = parse_tensor(_read_text(path), str(path))
    logger.debug("Read tensor of dims %s from %s", t.dims, path)
    return t


def write_tensor(path: PathLike, t: DenseTensor) -> None:
    """Write a tensor as ctensor-v1; doubles round-trip exactly."""
    _write_json(path, tensor_to_dict(t))


def read_factors(path: PathLike) -> CPDecomposition:
    """Read a cpfactors-v1 file."""
    return parse_factors(_read_text(path), str(path))


def write_factors(path: PathLike, cp: CPDecomposition) -> None:
    """Write a decomposition as cpfactors-v1."""
    _write_json(path, factors_to_dict(cp))
