import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcs_reduce.linalg import (
    LinAlgError,
    SingularMatrixError,
    SubspaceBasis,
    null_space,
    orthonormalize,
    principal_angle_distance,
    rank,
    solve_linear,
)


def test_null_space_identity_empty():
    assert null_space(np.eye(2)).dim == 0


def test_null_space_zero_matrix_full():
    assert null_space(np.zeros((2, 2))).dim == 2


def test_null_space_rank_one():
    basis = null_space(np.array([[1.0, 2.0], [2.0, 4.0]]), 1e-10)
    assert basis.dim == 1
    v = basis.vectors[0]
    # spans (2, -1) up to scale
    assert abs(v[0] * (-1.0) - v[1] * 2.0) < 1e-12


def test_null_space_residual_bound():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.normal(0.0, 1.0, (rng.integers(2, 6), rng.integers(2, 7)))
        basis = null_space(a)
        scale = 10.0 * 1e-10 * max(np.max(np.abs(a)), 1.0)
        for v in basis.vectors:
            assert np.max(np.abs(a @ v)) < scale


def test_solve_identity():
    assert np.allclose(solve_linear(np.eye(2), np.array([3.0, 4.0])), [3.0, 4.0])


def test_solve_diagonal():
    assert np.allclose(solve_linear(np.diag([2.0, 5.0]), np.array([2.0, 5.0])), [1.0, 1.0])


def test_solve_random_well_conditioned_residual():
    rng = np.random.default_rng(1)
    for _ in range(10):
        a = rng.normal(0.0, 1.0, (6, 6)) + 6.0 * np.eye(6)
        b = rng.normal(0.0, 1.0, 6)
        x = solve_linear(a, b)
        assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-10


def test_solve_singular_reports_pivot():
    with pytest.raises(SingularMatrixError) as err:
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))
    assert err.value.pivot >= 0.0


def test_non_finite_rejected():
    with pytest.raises(LinAlgError):
        solve_linear(np.array([[np.nan, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0]))


def test_dependent_basis_rejected():
    with pytest.raises(LinAlgError):
        SubspaceBasis(2, [np.array([1.0, 2.0]), np.array([2.0, 4.0])])


def test_principal_angle_identical():
    b = SubspaceBasis(3, [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.5])])
    assert principal_angle_distance(b, b) < 1e-12


def test_principal_angle_orthogonal():
    b1 = SubspaceBasis(2, [np.array([1.0, 0.0])])
    b2 = SubspaceBasis(2, [np.array([0.0, 1.0])])
    assert abs(principal_angle_distance(b1, b2) - math.pi / 2.0) < 1e-12


def test_principal_angle_small_perturbation():
    eps = 1e-3
    b1 = SubspaceBasis(2, [np.array([1.0, 0.0])])
    b2 = SubspaceBasis(2, [np.array([1.0, eps])])
    expected = 0.0009999996666668668  # arctan(1e-3)
    angle = principal_angle_distance(b1, b2)
    assert abs(angle - expected) / expected < 0.10


def test_principal_angle_dimension_mismatch():
    b1 = SubspaceBasis(2, [np.array([1.0, 0.0])])
    b2 = SubspaceBasis(2, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    with pytest.raises(LinAlgError):
        principal_angle_distance(b1, b2)


def test_principal_angle_vs_svd_oracle():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n, k = 6, 3
        b1 = SubspaceBasis(n, list(rng.normal(0.0, 1.0, (k, n))))
        b2 = SubspaceBasis(n, list(rng.normal(0.0, 1.0, (k, n))))
        mine = principal_angle_distance(b1, b2)
        q1 = np.linalg.qr(b1.matrix().T)[0]
        q2 = np.linalg.qr(b2.matrix().T)[0]
        sigma = np.linalg.svd(q1.T @ q2, compute_uv=False)
        oracle = math.acos(min(1.0, max(0.0, sigma[-1])))
        assert abs(mine - oracle) < 1e-9


def test_orthonormalize_drops_dependent_rows():
    q = orthonormalize(np.array([[1.0, 0.0], [2.0, 0.0], [1.0, 1.0]]))
    assert q.shape == (2, 2)
    assert np.allclose(q @ q.T, np.eye(2), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=1, max_value=5),
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=0, max_value=10_000),
)
def test_rank_nullity(rows, cols, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 1.0, (rows, cols))
    if seed % 3 == 0 and rows > 1:
        a[-1] = a[0] * 2.0  # force a dependent row sometimes
    assert null_space(a).dim + rank(a) == cols
    assert rank(a) == np.linalg.matrix_rank(a, tol=1e-8)
