import numpy as np
import pytest

from conftest import random_cp
from gpcpd.algorithms.genpoly import (
    MonomialLabel,
    build_system,
    check_rank_bounds,
    eigen_relation_check,
    is_generating_poly,
    multiply,
    pairing,
    solve_blocks,
    upsilon,
)
from gpcpd.bench import gen_instance
from gpcpd.core import CPDecomposition, hs_norm
from gpcpd.exceptions import RankBoundError, RankDeficientError, ShapeMismatchError


def _cube_generator():
    # (2 x_{1,1} - x_{1,2}) (2 x_{2,1} - x_{2,2})
    first = {MonomialLabel.partial(3, {0: 1}): 2, MonomialLabel.partial(3, {0: 2}): -1}
    second = {MonomialLabel.partial(3, {1: 1}): 2, MonomialLabel.partial(3, {1: 2}): -1}
    return multiply(first, second)


def test_monomial_product_and_position():
    mu = MonomialLabel.partial(3, {0: 2}) * MonomialLabel.partial(3, {1: 1, 2: 3})
    assert mu == MonomialLabel.full(2, 1, 3)
    assert mu.support == frozenset({0, 1, 2})
    assert mu.position((3, 3, 3)) == (1, 0, 2)


def test_monomial_product_must_be_multilinear():
    with pytest.raises(ShapeMismatchError):
        MonomialLabel.partial(3, {0: 1}) * MonomialLabel.partial(3, {0: 2})


def test_monomial_position_out_of_range():
    with pytest.raises(ShapeMismatchError):
        MonomialLabel.full(1, 4, 1).position((3, 3, 3))
    with pytest.raises(ShapeMismatchError):
        MonomialLabel.partial(3, {0: 1}).position((3, 3, 3))


def test_pairing(cube_3x3x3):
    coeffs = {MonomialLabel.full(1, 1, 1): 1, MonomialLabel.full(3, 3, 3): 2}
    assert pairing(coeffs, cube_3x3x3) == pytest.approx(11 + 2 * 8)


def test_generating_polynomial_of_cube(cube_3x3x3):
    p = _cube_generator()
    assert len(p) == 4
    assert is_generating_poly(p, {0, 1}, cube_3x3x3, 1e-12)
    for i3 in range(1, 4):
        q = {MonomialLabel.partial(3, {2: i3}): 1}
        assert pairing(multiply(p, q), cube_3x3x3) == pytest.approx(0)


def test_perturbed_polynomial_is_not_generating(cube_3x3x3):
    p = _cube_generator()
    p[MonomialLabel((1, 1, None))] = 4.5
    assert not is_generating_poly(p, {0, 1}, cube_3x3x3, 1e-12)


def test_generating_polynomial_support_must_match(cube_3x3x3):
    with pytest.raises(ShapeMismatchError):
        is_generating_poly({MonomialLabel.partial(3, {0: 1}): 1}, {0, 1}, cube_3x3x3, 1e-12)


def test_upsilon_labels():
    assert upsilon((5, 4, 3, 3)) == [(2, 1), (2, 2), (3, 1), (3, 2)]
    assert upsilon((4, 4, 3)) == [(2, 1), (2, 2)]


@pytest.mark.parametrize("dims, r, bound", [
    ((4, 4, 3), 5, "n_1"),
    ((6, 2, 2), 3, "N_3"),
    ((4, 4, 3), 0, "positive"),
])
def test_rank_bounds(dims, r, bound):
    with pytest.raises(RankBoundError) as info:
        check_rank_bounds(dims, r)
    assert info.value.bound == bound


def test_rank_bounds_need_order_three():
    with pytest.raises(ShapeMismatchError):
        check_rank_bounds((4, 4), 2)


def test_build_system_shapes():
    cp = random_cp((6, 5, 4, 3), 4, seed=0)
    system = build_system(cp.expand(), 4)
    assert system.block_sizes() == {2: 15, 3: 20}
    assert set(system.B) == set(upsilon((6, 5, 4, 3)))
    assert all(b.shape == system.A[j].shape for (j, _), b in system.B.items())
    assert not system.solved


def test_solved_blocks_share_eigenvectors(slices_4x4x3, slices_4x4x3_factors):
    system = solve_blocks(build_system(slices_4x4x3, 4))
    assert system.solved
    assert max(system.residuals.values()) < 1e-9 * np.linalg.norm(slices_4x4x3.data)
    assert eigen_relation_check(system, slices_4x4x3_factors, 1e-8)


def test_eigen_relation_check_rejects_wrong_factors(slices_4x4x3):
    system = solve_blocks(build_system(slices_4x4x3, 4))
    assert not eigen_relation_check(system, random_cp((4, 4, 3), 4, seed=1), 1e-6)


def test_rank_deficient_block():
    t = random_cp((4, 4, 3), 2, seed=2).expand()
    with pytest.raises(RankDeficientError) as info:
        solve_blocks(build_system(t, 3))
    assert info.value.details["j"] == 2
    assert info.value.details["numerical_rank"] == 2


def test_rank_one_system():
    cp = CPDecomposition((np.array([[1.0], [2.0]]), np.array([[1.0], [-1.0]]), np.array([[2.0], [3.0]])))
    system = solve_blocks(build_system(cp.expand(), 1))
    np.testing.assert_allclose(system.Y[(2, 1)], [[1.5]])


EXACT_CASES = [((6, 5, 4), 3), ((10, 8, 6), 6), ((5, 4, 3, 3), 5), ((7, 6, 5), 4), ((10, 8, 6), 5)]


@pytest.mark.parametrize("seed", range(20))
def test_eigen_relation_holds_on_exact_instances(seed):
    dims, r = EXACT_CASES[seed % len(EXACT_CASES)]
    inst = gen_instance(dims, r, 0.0, seed)
    system = solve_blocks(build_system(inst.F, r))
    assert max(system.residuals.values()) <= 1e-10 * hs_norm(inst.F)
    assert eigen_relation_check(system, inst.factors, 1e-8)


def test_pairing_is_linear(cube_3x3x3):
    rng = np.random.default_rng(0)
    labels = [MonomialLabel.full(i, j, k) for i in range(1, 4) for j in range(1, 4) for k in range(1, 3)]
    p = {label: complex(*rng.standard_normal(2)) for label in labels[:10]}
    q = {label: complex(*rng.standard_normal(2)) for label in labels[5:]}
    alpha, beta = 1.5 - 0.5j, -2.0 + 1j
    combined = {label: alpha * p.get(label, 0) + beta * q.get(label, 0) for label in set(p) | set(q)}
    expected = alpha * pairing(p, cube_3x3x3) + beta * pairing(q, cube_3x3x3)
    assert pairing(combined, cube_3x3x3) == pytest.approx(expected, rel=1e-13)
