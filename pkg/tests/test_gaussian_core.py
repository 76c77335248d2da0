import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetqkd.attacks import build_entangling_cloner
from hetqkd.errors import ConditioningError, DimensionError, DomainError
from hetqkd.gaussian_core import (
    BlockDiagSymplectic,
    IwasawaParams,
    beam_splitter,
    compose_iwasawa,
    conditional_variance,
    determinant_ratio,
    euler_orthogonal,
    input_covariance,
    is_physical,
    iwasawa_factors,
    propagate,
    random_orthogonal,
    symplectic_eigenvalues,
    symplectic_invariants,
    symplectic_residual,
)

from strategies import three_mode_params


def test_identity_is_symplectic():
    assert symplectic_residual(np.eye(6)) == 0.0


def test_beam_splitter_is_symplectic():
    assert symplectic_residual(beam_splitter(2, 0, 1, 0.5).full()) <= 1e-15


def test_odd_dimension_rejected():
    with pytest.raises(DimensionError):
        symplectic_residual(np.eye(3))


def test_non_symplectic_detected():
    S = np.diag([2.0, 1.0, 1.0, 1.0])
    assert symplectic_residual(S) == pytest.approx(1.0)


def test_compose_trivial():
    S = compose_iwasawa(IwasawaParams(np.eye(3), np.ones(3), np.eye(3)))
    np.testing.assert_array_equal(S.sx, np.eye(3))
    np.testing.assert_array_equal(S.sp, np.eye(3))


def test_compose_single_mode_squeezer():
    s = 1.7
    S = compose_iwasawa(IwasawaParams(np.eye(3), np.array([s, 1.0, 1.0]), np.eye(3)))
    np.testing.assert_allclose(S.sx, np.diag([s, 1, 1]))
    np.testing.assert_allclose(S.sp, np.diag([1 / s, 1, 1]))


def test_compose_sample_residual():
    A = np.array([[1.0, 0, 0], [0.3, 1, 0], [0, 0, 1]])
    p = IwasawaParams(A, np.array([1.2, 0.9, 1.1]), euler_orthogonal([0.1, 0.2, 0.3]))
    S = compose_iwasawa(p)
    assert symplectic_residual(S.full()) <= 1e-12
    assert S.block_residual() <= 1e-12


def test_compose_rejects_nonpositive_squeezing():
    with pytest.raises(DomainError):
        compose_iwasawa(IwasawaParams(np.eye(3), np.array([1.0, 0.0, 1.0]), np.eye(3)))


@given(three_mode_params())
def test_composed_attacks_are_symplectic(p):
    S = compose_iwasawa(p)
    assert symplectic_residual(S.full()) <= 1e-10
    assert abs(np.linalg.det(S.full()) - 1.0) <= 1e-8
    np.testing.assert_allclose(S.sp, np.linalg.inv(S.sx).T, atol=1e-10, rtol=1e-10)


@given(three_mode_params())
def test_iwasawa_factors_roundtrip(p):
    q = iwasawa_factors(compose_iwasawa(p).sx)
    np.testing.assert_allclose(q.A, p.A, atol=1e-8)
    np.testing.assert_allclose(q.D, p.D, rtol=1e-10)
    np.testing.assert_allclose(q.B, p.B, atol=1e-10)


def test_propagate_identity(rng):
    g = input_covariance(5.0, 3)
    np.testing.assert_array_equal(propagate(np.eye(6), g), g)


def test_propagate_beam_splitter_mixing():
    V, T_E = 7.0, 0.3
    out = propagate(beam_splitter(2, 0, 1, T_E), input_covariance(V, 2))
    assert out[0, 0] == pytest.approx(T_E * V + 1 - T_E, abs=1e-14)


def test_propagate_dimension_mismatch():
    with pytest.raises(DimensionError):
        propagate(np.eye(4), np.eye(6))


@pytest.mark.parametrize("V, expected", [(11.0, (123.0, 243.0, 121.0)), (1.0, (3.0, 3.0, 1.0))])
def test_input_invariants(V, expected):
    inv = symplectic_invariants(input_covariance(V, 3))
    np.testing.assert_allclose(inv.as_array(), expected, atol=1e-12)


def test_invariants_need_three_modes():
    with pytest.raises(DimensionError):
        symplectic_invariants(np.eye(4))


@given(three_mode_params(), st.floats(min_value=1.0, max_value=50.0))
def test_propagation_preserves_invariants(p, V):
    g = propagate(compose_iwasawa(p), input_covariance(V, 3))
    inv = symplectic_invariants(g).as_array()
    expected = np.array([V**2 + 2, 2 * V**2 + 1, V**2])
    np.testing.assert_allclose(inv, expected, rtol=1e-8)
    np.testing.assert_allclose(symplectic_eigenvalues(g), [1.0, 1.0, V], rtol=1e-8)
    assert is_physical(g)


def test_invariants_match_eigenvalue_polynomials(rng):
    # oracle: elementary symmetric polynomials of the squared symplectic eigenvalues
    for _ in range(20):
        O = random_orthogonal(3, rng)
        S = compose_iwasawa(IwasawaParams(np.eye(3), np.exp(rng.uniform(-1, 1, 3)), O))
        g = propagate(S, np.diag(np.tile(rng.uniform(1, 4, 3), 2)))
        nu2 = symplectic_eigenvalues(g) ** 2
        e = [sum(np.prod(c) for c in itertools.combinations(nu2, k)) for k in (1, 2, 3)]
        np.testing.assert_allclose(symplectic_invariants(g).as_array(), e, rtol=1e-9)


def test_invariants_after_random_attack_V5(rng):
    p = IwasawaParams(np.tril(rng.standard_normal((3, 3)), -1) + np.eye(3), np.exp(rng.uniform(-1, 1, 3)), random_orthogonal(3, rng))
    inv = symplectic_invariants(propagate(compose_iwasawa(p), input_covariance(5.0, 3)))
    np.testing.assert_allclose(inv.as_array(), [27.0, 51.0, 25.0], atol=1e-8)


def test_conditional_variance_uncorrelated():
    g = np.diag([3.0, 2.0, 1.0, 3.0, 2.0, 1.0])
    assert conditional_variance(g, 0, [1, 2]) == 3.0


def test_conditional_variance_two_by_two():
    V, W, c = 5.0, 2.0, 1.5
    g = np.array([[V, c], [c, W]])
    assert conditional_variance(g, 0, [1]) == pytest.approx(V - c * c / W)


def test_conditional_variance_singular_block():
    g = np.ones((3, 3))
    with pytest.raises(ConditioningError):
        conditional_variance(g, 0, [1, 2])


def test_conditional_variance_entangling_cloner_homodyne():
    V, T, eps = 11.0, 0.5, 0.02
    chi = 1 / T + eps - 1
    g = propagate(build_entangling_cloner(T, eps).symplectic, input_covariance(V, 3))
    assert conditional_variance(g, 0, [1, 2]) == pytest.approx(V / (T * (1 + chi * V)), abs=1e-10)


@given(three_mode_params(), st.floats(min_value=1.0, max_value=30.0))
def test_schur_equals_determinant_ratio(p, V):
    g = propagate(compose_iwasawa(p), input_covariance(V, 3))
    for target, given_set in ((0, [1, 2]), (3, [4, 5]), (0, [1]), (3, [5])):
        schur = conditional_variance(g, target, given_set)
        ratio = determinant_ratio(g, target, given_set)
        assert abs(schur - ratio) <= 1e-10 * max(1.0, abs(schur), g[target, target])


@given(three_mode_params(), st.floats(min_value=1.0, max_value=30.0))
def test_conditioning_never_increases_variance(p, V):
    g = propagate(compose_iwasawa(p), input_covariance(V, 3))
    scale = 1e-10 * g[0, 0]
    assert conditional_variance(g, 0, [1]) >= conditional_variance(g, 0, [1, 2]) - scale
    assert conditional_variance(g, 0, [1, 2]) >= conditional_variance(g, 0, [1, 2, 5]) - scale
    assert g[0, 0] >= conditional_variance(g, 0, [4]) - scale


def test_random_orthogonal_n1():
    assert abs(random_orthogonal(1, 3)[0, 0]) == 1.0


@given(st.integers(min_value=0, max_value=2**32))
def test_random_orthogonal_is_orthogonal(seed):
    Q = random_orthogonal(3, seed)
    assert np.max(np.abs(Q @ Q.T - np.eye(3))) <= 1e-12


def test_random_orthogonal_deterministic():
    np.testing.assert_array_equal(random_orthogonal(4, 99), random_orthogonal(4, 99))


def test_random_orthogonal_sign_balance():
    dets = np.array([np.linalg.det(random_orthogonal(3, s)) for s in range(10_000)])
    frac = np.mean(dets < 0)
    assert 0.45 <= frac <= 0.55


def test_random_orthogonal_rejects_zero_modes():
    with pytest.raises(DomainError):
        random_orthogonal(0, 1)


def test_block_diag_composition_is_matrix_product(rng):
    a = BlockDiagSymplectic.from_x_block(rng.standard_normal((3, 3)) + 3 * np.eye(3))
    b = beam_splitter(3, 0, 2, 0.4)
    np.testing.assert_allclose((a @ b).full(), a.full() @ b.full())
