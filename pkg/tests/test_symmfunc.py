import itertools
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from matorsion import symmfunc
from matorsion.symmfunc import InvalidInput


def sym(rng, shape):
    X = rng.standard_normal(shape)
    return 0.5 * (X + np.swapaxes(X, -1, -2))


# --- generalized delta ------------------------------------------------------


@pytest.mark.parametrize("upper,lower,expected", [((1, 2), (1, 2), 1), ((1, 2), (2, 1), -1), ((1, 1), (1, 2), 0)])
def test_gen_delta_small_cases(upper, lower, expected):
    assert symmfunc.gen_delta(upper, lower, 3) == expected


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_gen_delta_sign_route_matches_determinant_route(n):
    for k in range(1, n + 1):
        for up in itertools.product(range(1, n + 1), repeat=k):
            for lo in itertools.permutations(range(1, n + 1), k):
                assert symmfunc.gen_delta(up, lo, n, "sign") == symmfunc.gen_delta(up, lo, n, "det")


def test_gen_delta_long_tuples_use_determinant():
    up = (1, 2, 3, 4, 5, 6)
    lo = (2, 1, 3, 4, 6, 5)
    assert symmfunc.gen_delta(up, lo, 6) == 1
    assert symmfunc.gen_delta(up, lo, 6, "sign") == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.permutations(range(1, n + 1)),
                                                      st.permutations(range(1, n + 1)))))
def test_swapping_upper_indices_flips_sign(data):
    n, up, lo = data
    sw = [up[1], up[0]] + list(up[2:])
    assert symmfunc.gen_delta(sw, lo, n) == -symmfunc.gen_delta(up, lo, n)


@pytest.mark.parametrize("upper,lower,n", [((1, 2), (1,), 3), ((0, 1), (1, 2), 3), ((1, 4), (1, 2), 3)])
def test_gen_delta_rejects_bad_indices(upper, lower, n):
    with pytest.raises(InvalidInput):
        symmfunc.gen_delta(upper, lower, n)


def test_permutation_sign():
    assert symmfunc.permutation_sign((0, 1, 2)) == 1
    assert symmfunc.permutation_sign((1, 0, 2)) == -1
    assert symmfunc.permutation_sign((1, 2, 0)) == 1


# --- contraction --------------------------------------------------------------


def test_contract_delta_examples():
    assert symmfunc.contract_delta((2,), (2,), 1, 3) == 2
    assert symmfunc.contract_delta((1,), (1,), 2, 4) == 12
    assert symmfunc.contract_delta((1, 1), (1, 2), 1, 3) == 0


def test_contraction_factor_by_hand():
    # sum over i of delta^{i a}_{i b} = (n - 1) delta^a_b
    assert symmfunc.contraction_factor(3, 2, 1) == 2
    assert symmfunc.contraction_factor(4, 3, 2) == math.factorial(2) * math.factorial(3)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_contraction_table_exhaustive(n):
    for k in range(2, n + 1):
        for p in range(1, k):
            brute, rhs = symmfunc.contraction_table(n, k, p)
            assert_array_equal(brute, rhs)


def test_contract_delta_rejects_p_out_of_range():
    with pytest.raises(InvalidInput):
        symmfunc.contract_delta((1, 2), (1, 2), 0, 3)


# --- S_k ---------------------------------------------------------------------


def test_elem_sym_examples():
    lam = np.array([1.0, 2.0, 3.0])
    assert symmfunc.elem_sym_eigen(lam, 2) == 11
    assert symmfunc.elem_sym_eigen(lam, 3) == 6
    assert symmfunc.elem_sym_eigen(lam, 0) == 1
    assert symmfunc.elem_sym_matrix(np.eye(3), 2) == 3
    assert_allclose(symmfunc.elem_sym_matrix(np.diag(lam), 2), 11, rtol=0, atol=1e-14)


def test_elem_sym_rejects_k_above_n():
    with pytest.raises(InvalidInput):
        symmfunc.elem_sym_eigen(np.ones(3), 4)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_delta_sum_matches_eigenvalues(n):
    rng = np.random.default_rng(n)
    A = sym(rng, (100, n, n))
    lam = np.linalg.eigvalsh(A)
    for k in range(n + 1):
        assert_allclose(symmfunc.elem_sym_matrix(A, k), symmfunc.elem_sym_eigen(lam, k), rtol=0, atol=1e-12)
    assert_allclose(symmfunc.elem_sym_matrix(A, 1), np.trace(A, axis1=1, axis2=2), atol=1e-12)
    assert_allclose(symmfunc.elem_sym_matrix(A, n), np.linalg.det(A), atol=1e-12)


def test_elem_sym_matrix_nonsymmetric_matches_characteristic_polynomial():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((4, 4))
    coeffs = np.poly(A)  # det(xI - A) = sum (-1)^k S_k x^{n-k}
    for k in range(5):
        assert_allclose(symmfunc.elem_sym_matrix(A, k), (-1) ** k * coeffs[k], atol=1e-12)


def test_elem_sym_matrix_symbolic_equals_sympy_determinant():
    M = sp.Matrix(3, 3, sp.symbols("a0:9"))
    S3 = symmfunc.elem_sym_matrix(np.array(M.tolist(), dtype=object), 3)
    assert sp.expand(S3 - M.det()) == 0


# --- Newton tensors and cofactors ------------------------------------------


def test_newton_tensor_identity_argument():
    assert_allclose(symmfunc.newton_tensor([np.eye(2)]), np.eye(2))
    # [T_1](I) = (n-1) I in general
    assert_allclose(symmfunc.newton_tensor([np.eye(4)]), 3 * np.eye(4))


def test_newton_tensor_symmetric_in_arguments():
    rng = np.random.default_rng(2)
    A, B = rng.standard_normal((2, 4, 4))
    assert_allclose(symmfunc.newton_tensor([A, B]), symmfunc.newton_tensor([B, A]), atol=1e-14)


def test_newton_tensor_rejects_bad_input():
    with pytest.raises(InvalidInput):
        symmfunc.newton_tensor([np.eye(2), np.eye(3)])
    with pytest.raises(InvalidInput):
        symmfunc.newton_tensor([np.eye(2), np.eye(2)])


def test_cofactor_examples():
    assert_allclose(symmfunc.cofactor_sk(np.eye(2), 2), np.eye(2))
    assert_allclose(symmfunc.cofactor_sk(np.diag([2.0, 3.0]), 2), np.diag([3.0, 2.0]))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cofactor_top_degree_is_adjugate(n):
    rng = np.random.default_rng(n)
    A = rng.standard_normal((n, n))
    assert_allclose(symmfunc.cofactor_sk(A, n), np.linalg.det(A) * np.linalg.inv(A).T, atol=1e-12)


def test_cofactor_is_gradient_of_sk_by_finite_differences():
    rng = np.random.default_rng(3)
    A = sym(rng, (4, 4))
    h = 1e-6
    for k in range(1, 5):
        C = symmfunc.cofactor_sk(A, k)
        for i, j in [(0, 0), (1, 2), (3, 1)]:
            E = np.zeros((4, 4))
            E[i, j] = h
            fd = (symmfunc.elem_sym_matrix(A + E, k) - symmfunc.elem_sym_matrix(A - E, k)) / (2 * h)
            assert_allclose(C[i, j], fd, atol=1e-7)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_euler_identity(n):
    rng = np.random.default_rng(10 + n)
    A = sym(rng, (50, n, n))
    for k in range(1, n + 1):
        lhs = np.einsum("pij,pij->p", symmfunc.cofactor_sk(A, k), A)
        assert_allclose(lhs, k * symmfunc.elem_sym_matrix(A, k), atol=1e-12)


def test_cofactor_is_newton_tensor_without_one_over_k():
    rng = np.random.default_rng(4)
    A = sym(rng, (3, 3))
    for k in (2, 3):
        T = symmfunc.newton_tensor([A] * (k - 1))
        assert_allclose(symmfunc.cofactor_sk(A, k), T, atol=1e-14)
        # with the 1/k factor the contraction gives S_k instead of k S_k
        assert_allclose(np.sum(T / k * A), symmfunc.elem_sym_matrix(A, k), atol=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_cofactor_rows_divergence_free_on_cubics(n):
    xs = sp.symbols(f"x0:{n}")
    rng = np.random.default_rng(n)
    monos = [sp.Mul(*[x ** e for x, e in zip(xs, ex)]) for ex in itertools.product(range(4), repeat=n) if sum(ex) <= 3]
    u = sum(int(c) * m for c, m in zip(rng.integers(-4, 5, len(monos)), monos))
    H = np.array(sp.hessian(u, xs).tolist(), dtype=object)
    for k in range(1, n + 1):
        C = symmfunc.cofactor_sk(H, k)
        for j in range(n):
            assert sp.expand(sum(sp.diff(C[i, j], xs[i]) for i in range(n))) == 0
