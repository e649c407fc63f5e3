import numpy as np
import pytest

from conftest import random_cp
from gpcpd.algorithms import gevd_decompose
from gpcpd.algorithms.gevd import build_gevd_workspace
from gpcpd.core import DenseTensor, cp_equivalent, hs_norm
from gpcpd.exceptions import PencilError, RankBoundError, ShapeMismatchError


def test_slices_need_slice_recombination(slices_4x4x3, slices_4x4x3_factors):
    ws = build_gevd_workspace(slices_4x4x3, 4)
    assert ws.retried
    cp = gevd_decompose(slices_4x4x3, 4)
    assert hs_norm(slices_4x4x3 - cp.expand()) < 1e-9 * hs_norm(slices_4x4x3)
    assert cp_equivalent(cp, slices_4x4x3_factors, 1e-6)


def test_exact_instance(exact_instance):
    ws = build_gevd_workspace(exact_instance.F, 3)
    assert not ws.retried
    assert ws.Fhat.dims == (3, 5, 4)
    assert np.all(ws.slice_ratios() < 1e-8)
    cp = gevd_decompose(exact_instance.F, 3)
    assert cp_equivalent(cp, exact_instance.factors, 1e-6)


def test_unsorted_modes_are_restored():
    cp = random_cp((3, 6, 4), 3, seed=21)
    result = gevd_decompose(cp.expand(), 3)
    assert result.dims == (3, 6, 4)
    assert cp_equivalent(result, cp, 1e-6)


def test_rank_above_middle_dimension(exact_instance):
    with pytest.raises(RankBoundError) as info:
        gevd_decompose(exact_instance.F, 6)
    assert info.value.bound == "n_2"


@pytest.mark.parametrize("dims", [(3, 3, 3, 3), (3, 3, 1)])
def test_unsupported_shapes(dims):
    with pytest.raises(ShapeMismatchError):
        gevd_decompose(random_cp(dims, 2, seed=22).expand(), 2)


def test_zero_tensor_has_no_usable_pencil():
    with pytest.raises(PencilError):
        gevd_decompose(DenseTensor.zeros((3, 3, 2)), 2)
