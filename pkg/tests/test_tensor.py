import numpy as np
import pytest

from conftest import random_cp, random_tensor
from gpcpd.core import (
    CPDecomposition,
    DenseTensor,
    cp_equivalent,
    expand,
    hs_norm,
    khatri_rao,
    kruskal_rank,
    kruskal_uniqueness,
    mode_product,
    normalize_cp,
    permute_modes,
    unfold,
)
from gpcpd.core.tensor import descending_mode_order, inverse_permutation, numerical_rank
from gpcpd.exceptions import KruskalGuardError, ShapeMismatchError


def test_from_array_keeps_row_major_layout():
    values = np.arange(24).reshape(2, 3, 4)
    t = DenseTensor.from_array(values)
    assert t.dims == (2, 3, 4)
    assert t.order == 3
    assert t.data[1] == 1
    assert t[1, 2, 3] == 23
    np.testing.assert_array_equal(t.array, values)


def test_tensor_data_is_read_only():
    t = DenseTensor.from_array(np.ones((2, 2)))
    with pytest.raises(ValueError):
        t.data[0] = 5


def test_tensor_rejects_wrong_length():
    with pytest.raises(ShapeMismatchError) as info:
        DenseTensor((2, 3), np.zeros(5))
    assert info.value.details["length"] == 5


def test_tensor_arithmetic():
    a = random_tensor((3, 2, 2), 0)
    b = random_tensor((3, 2, 2), 1)
    np.testing.assert_allclose((a + b).array, a.array + b.array)
    np.testing.assert_allclose((a - b).array, a.array - b.array)
    np.testing.assert_allclose((2j * a).array, 2j * a.array)
    with pytest.raises(ShapeMismatchError):
        a + random_tensor((2, 3, 2), 2)


def test_hs_norm_is_frobenius_norm():
    t = random_tensor((4, 3, 2), 3)
    assert hs_norm(t) == pytest.approx(np.linalg.norm(t.array.ravel()))


def test_expand_rank_one_is_outer_product():
    a, b, c = np.array([1, 2]), np.array([1j, 0, 3]), np.array([2, -1])
    cp = CPDecomposition((a[:, None], b[:, None], c[:, None]))
    np.testing.assert_allclose(expand(cp).array, np.einsum("i,j,k->ijk", a, b, c))


def test_expand_matches_einsum():
    cp = random_cp((4, 3, 5, 2), 3, seed=4)
    u1, u2, u3, u4 = cp.factors
    np.testing.assert_allclose(cp.expand().array, np.einsum("ir,jr,kr,lr->ijkl", u1, u2, u3, u4))


def test_cp_factors_must_share_rank():
    with pytest.raises(ShapeMismatchError):
        CPDecomposition((np.ones((3, 2)), np.ones((3, 3))))


def test_khatri_rao_columns_are_kronecker_products():
    rng = np.random.default_rng(5)
    a, b = rng.standard_normal((3, 2)), rng.standard_normal((4, 2))
    kr = khatri_rao([a, b])
    assert kr.shape == (12, 2)
    for s in range(2):
        np.testing.assert_allclose(kr[:, s], np.kron(a[:, s], b[:, s]))


def test_unfold_shape():
    t = random_tensor((2, 3, 4), 6)
    assert unfold(t.array, 1).shape == (3, 8)
    np.testing.assert_allclose(unfold(t.array, 0), t.array.reshape(2, 12))


def test_mode_product_matches_einsum():
    t = random_tensor((3, 4, 2), 7)
    v = np.random.default_rng(8).standard_normal((5, 4))
    result = mode_product(v, 1, t)
    assert result.dims == (3, 5, 2)
    np.testing.assert_allclose(result.array, np.einsum("aj,ijk->iak", v, t.array))


def test_mode_product_rejects_bad_shapes():
    t = random_tensor((3, 4, 2), 9)
    with pytest.raises(ShapeMismatchError):
        mode_product(np.ones((2, 3)), 1, t)
    with pytest.raises(ShapeMismatchError):
        mode_product(np.ones((2, 3)), 3, t)


def test_permutation_of_tensor_and_factors_agree():
    cp = random_cp((2, 3, 4), 2, seed=10)
    perm = (2, 0, 1)
    np.testing.assert_allclose(permute_modes(cp.expand(), perm).array,
                               cp.permute_modes(perm).expand().array)
    assert inverse_permutation(perm) == (1, 2, 0)


def test_descending_mode_order_is_stable():
    assert descending_mode_order((3, 5, 3, 4)) == (1, 3, 0, 2)


def test_numerical_rank():
    a = np.outer([1, 2, 3], [1, 1]) + np.outer([0, 1, 0], [1, -1])
    assert numerical_rank(a) == 2
    assert numerical_rank(np.zeros((3, 3))) == 0


@pytest.mark.parametrize("matrix, expected", [
    (np.eye(3), 3),
    (np.array([[1, 1, 0], [0, 0, 1]]), 1),
    (np.array([[1, 0, 0], [0, 1, 0]]), 0),
    (np.array([[1, 0, 1], [0, 1, 1]]), 2),
])
def test_kruskal_rank(matrix, expected):
    assert kruskal_rank(matrix) == expected


def test_kruskal_rank_guard():
    with pytest.raises(KruskalGuardError) as info:
        kruskal_rank(np.ones((2, 13)))
    assert info.value.details["limit"] == 12


def test_kruskal_uniqueness_for_generic_factors():
    report = kruskal_uniqueness(random_cp((4, 4, 3), 4, seed=11))
    assert (report["kappa_1"], report["kappa_2"], report["kappa_3"]) == (4, 4, 3)
    assert report["unique"]


def test_kruskal_uniqueness_needs_order_three():
    with pytest.raises(ShapeMismatchError):
        kruskal_uniqueness(random_cp((3, 3, 3, 3), 2, seed=12))


def test_normalize_cp_keeps_tensor_and_fixes_first_rows():
    cp = random_cp((4, 3, 5), 3, seed=13)
    normalized = normalize_cp(cp)
    np.testing.assert_allclose(normalized.expand().array, cp.expand().array, atol=1e-12)
    for factor in normalized.factors[1:]:
        np.testing.assert_allclose(factor[0], np.ones(3))


def test_normalize_cp_pivots_on_largest_entry_when_first_is_zero():
    cp = CPDecomposition((np.array([[2.0]]), np.array([[0.0], [4.0], [-1.0]])))
    normalized = normalize_cp(cp)
    np.testing.assert_allclose(normalized.factors[1][:, 0], [0, 1, -0.25])
    np.testing.assert_allclose(normalized.factors[0][:, 0], [8])


def test_cp_equivalent_up_to_permutation_and_scaling():
    cp = random_cp((4, 3, 3), 3, seed=14)
    u1, u2, u3 = cp.factors
    perm = [2, 0, 1]
    scales = np.array([2.0, -1j, 0.5])
    other = CPDecomposition((u1[:, perm] * scales, u2[:, perm] / scales * 3, u3[:, perm] / 3))
    assert cp_equivalent(other, cp, 1e-10)


def test_cp_equivalent_detects_perturbation():
    tol = 1e-6
    reference = normalize_cp(random_cp((4, 3, 3), 3, seed=15))
    factors = [np.array(f) for f in reference.factors]
    column_max = np.max(np.abs(factors[0][:, 0]))
    factors[0][1, 0] += 10 * tol * column_max
    assert not cp_equivalent(CPDecomposition(tuple(factors)), reference, tol)

    factors[0][1, 0] = reference.factors[0][1, 0] + 0.1 * tol * column_max
    assert cp_equivalent(CPDecomposition(tuple(factors)), reference, tol)


def test_cp_equivalent_rejects_different_shapes():
    assert not cp_equivalent(random_cp((3, 3, 3), 2, 16), random_cp((3, 3, 3), 3, 16), 1e-6)
    assert not cp_equivalent(random_cp((3, 3, 3), 2, 17), random_cp((3, 3, 4), 2, 17), 1e-6)


def test_cp_equivalent_ignores_first_entries_near_pivot_threshold():
    rng = np.random.default_rng(18)
    u1 = rng.standard_normal((3, 1)) + 1j * rng.standard_normal((3, 1))
    u3 = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
    above = np.array([[1.0000001e-12 * np.sqrt(5.0)], [1.0], [2.0]])
    below = np.array([[0.9999999e-12 * np.sqrt(5.0)], [1.0], [2.0]])
    a = CPDecomposition((u1, below, u3))
    b = CPDecomposition((3 * u1, above / 3, u3))
    assert normalize_cp(b).factors[1][0, 0] == pytest.approx(1.0)
    assert normalize_cp(a).factors[1][2, 0] == pytest.approx(1.0)
    assert cp_equivalent(a, b, 1e-6)
    assert cp_equivalent(b, a, 1e-6)


def test_cp_equivalent_with_zero_terms():
    cp = random_cp((3, 3, 2), 2, seed=19)
    factors = [np.array(f) for f in cp.factors]
    factors[1][:, 1] = 0
    zeroed = CPDecomposition(tuple(factors))
    factors = [np.array(f) for f in zeroed.factors]
    factors[2][:, 1] = 0
    factors[1][:, 1] = 1
    assert cp_equivalent(CPDecomposition(tuple(factors)), zeroed, 1e-10)
    assert not cp_equivalent(cp, zeroed, 1e-6)


def test_expand_of_rank_zero_is_zero_tensor():
    cp = CPDecomposition((np.zeros((2, 0)), np.zeros((3, 0))))
    t = expand(cp)
    assert t.dims == (2, 3)
    assert hs_norm(t) == 0
    assert expand(CPDecomposition((np.zeros((2, 0)), np.zeros((3, 0)), np.zeros((4, 0))))).dims == (2, 3, 4)


def test_khatri_rao_with_no_columns():
    assert khatri_rao([np.zeros((2, 0)), np.zeros((3, 0))]).shape == (6, 0)
