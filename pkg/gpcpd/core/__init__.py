"""
Core tensor types, flattenings and file formats.
"""

from .tensor import (
    DenseTensor,
    CPDecomposition,
    expand,
    hs_norm,
    khatri_rao,
    unfold,
    mode_product,
    permute_modes,
    kruskal_rank,
    kruskal_uniqueness,
    normalize_cp,
    cp_equivalent,
)

from .flattening import (
    FlattenPlan,
    ReshapePlan,
    most_square_flatten,
    flattening_singular_values,
    estimate_rank,
    reshape3,
    unreshape3,
    choose_reshape_plan,
)
