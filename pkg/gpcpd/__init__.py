"""
gpcpd: CP tensor decompositions and low-rank approximations by generating polynomials.
"""

__version__ = "1.0.0"

from .exceptions import (
    TensorError,
    ShapeMismatchError,
    InvalidPlanError,
    RankBoundError,
    KruskalGuardError,
    ParameterError,
    FormatError,
    NumericalError,
    RankDeficientError,
    DegenerateSpectrumError,
    ReshapeFactorizationError,
    PencilError,
)

from .core import (
    DenseTensor,
    CPDecomposition,
    FlattenPlan,
    ReshapePlan,
    expand,
    hs_norm,
    mode_product,
    kruskal_rank,
    kruskal_uniqueness,
    normalize_cp,
    cp_equivalent,
    most_square_flatten,
    flattening_singular_values,
    estimate_rank,
    reshape3,
    unreshape3,
    choose_reshape_plan,
)
from .core.parser import read_tensor, write_tensor, read_factors, write_factors

from .algorithms import (
    ApproxOptions,
    ApproxResult,
    decompose,
    decompose_reshaped,
    approximate,
    approximate_reshaped,
    refine_als,
    rank1_approx,
    gevd_decompose,
    run_method,
)
