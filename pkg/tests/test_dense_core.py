import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lowrank_bounds.dense_core import (
    EPS,
    LinAlgError,
    OrthonormalBasis,
    RankError,
    best_rank_k,
    complement_basis,
    orthonormalize,
    pseudoinverse,
    read_csv,
    svd,
    truncate,
    write_csv,
)
from oracles import oracle_singular_values, projector_matrix, seeded_matrix, seeded_orthonormal


def assert_svd_invariants(a, f):
    m, n = a.shape
    s = f.singular_values
    assert f.u.shape == (m, m) and f.v.shape == (n, n)
    assert np.allclose(f.u.T @ f.u, np.eye(m), atol=1e-12)
    assert np.allclose(f.v.T @ f.v, np.eye(n), atol=1e-12)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
    scale = max(1.0, f.sigma_max) * np.sqrt(m * n)
    assert np.max(np.abs(f.reconstruct() - a)) <= 1e-12 * scale


def test_svd_diagonal():
    f = svd(np.diag([3.0, 2.0, 1.0]))
    assert np.array_equal(f.singular_values, [3.0, 2.0, 1.0])
    assert np.allclose(f.u, np.eye(3)) and np.allclose(f.v, np.eye(3))


def test_svd_zero_matrix():
    a = np.zeros((2, 3))
    f = svd(a)
    assert np.array_equal(f.singular_values, [0.0, 0.0])
    assert_svd_invariants(a, f)
    assert f.rank() == 0


def test_svd_matches_oracle_seed42():
    a = seeded_matrix(42, 5, 4)
    assert np.max(np.abs(svd(a).singular_values - oracle_singular_values(a))) < 1e-10


@pytest.mark.parametrize("shape", [(1, 1), (1, 5), (5, 1), (4, 4), (7, 3), (3, 7), (20, 15), (32, 32)])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_svd_invariants_random(shape, seed):
    a = seeded_matrix(seed, *shape)
    assert_svd_invariants(a, svd(a))


def test_svd_is_deterministic_and_sign_fixed():
    a = seeded_matrix(3, 6, 4)
    f1, f2 = svd(a), svd(a)
    assert np.array_equal(f1.u, f2.u) and np.array_equal(f1.v, f2.v)
    for j in range(f1.u.shape[1]):
        col = f1.u[:, j]
        first = col[np.abs(col) > 8 * EPS * np.abs(col).max()][0]
        assert first >= 0


def test_svd_ties_and_repeated_columns():
    a = np.column_stack([np.ones(4), np.ones(4), np.ones(4), [1, -1, 1, -1.0]])
    f = svd(a)
    assert_svd_invariants(a, f)
    assert f.rank() == 2
    assert np.allclose(f.singular_values[:2], [np.sqrt(12), 2.0])


def test_svd_graded_matrix():
    a = np.diag(10.0 ** -np.arange(8.0)) @ seeded_orthonormal(4, 8, 8)
    s = svd(a).singular_values
    assert np.allclose(s, 10.0 ** -np.arange(8.0), rtol=1e-12)


def test_svd_rejects_nonfinite():
    with pytest.raises(LinAlgError):
        svd(np.array([[1.0, np.nan]]))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)), elements=st.floats(-1e3, 1e3)))
def test_svd_property(a):
    f = svd(a)
    assert_svd_invariants(a, f)


def test_truncate_diagonal():
    approx = truncate(svd(np.diag([3.0, 2.0, 1.0])), 2)
    assert np.allclose(approx.a_k, np.diag([3.0, 2.0, 0.0]), atol=1e-15)


def test_truncate_full_rank_is_identity():
    a = seeded_matrix(8, 5, 3)
    assert np.allclose(best_rank_k(a, 3).a_k, a, atol=1e-13)


def test_truncate_seed42_frobenius_tail():
    a = seeded_matrix(42, 5, 4)
    s = oracle_singular_values(a)
    a2 = best_rank_k(a, 2).a_k
    assert abs(np.linalg.norm(a - a2) ** 2 - (s[2] ** 2 + s[3] ** 2)) < 1e-10


@pytest.mark.parametrize("k", [1, 2, 3])
def test_truncate_two_norm_error(k):
    a = seeded_matrix(10 + k, 6, 5)
    f = svd(a)
    err = svd(a - truncate(f, k).a_k).singular_values[0]
    assert abs(err - f.singular_values[k]) <= 1e-10 * f.sigma_max


def test_truncate_rejects_rank_overflow():
    a = np.outer([1.0, 2, 3], [1.0, 1])
    with pytest.raises(RankError) as info:
        truncate(svd(a), 2)
    assert info.value.rank == 1


def test_truncate_brute_force_optimality():
    rng = np.random.default_rng(5)
    for trial in range(10):
        m, n, k = rng.integers(3, 7), rng.integers(3, 7), rng.integers(1, 4)
        a = rng.standard_normal((m, n))
        if k >= min(m, n):
            continue
        ak = best_rank_k(a, k).a_k
        for _ in range(50):
            b = rng.standard_normal((m, k)) @ rng.standard_normal((k, n))
            assert np.linalg.norm(a - ak, 2) <= np.linalg.norm(a - b, 2) + 1e-10
            assert np.linalg.norm(a - ak) <= np.linalg.norm(a - b) + 1e-10


def moore_penrose_residuals(a, x):
    return (
        np.max(np.abs(a @ x @ a - a)),
        np.max(np.abs(x @ a @ x - x)),
        np.max(np.abs((a @ x).T - a @ x)),
        np.max(np.abs((x @ a).T - x @ a)),
    )


def test_pinv_diagonal():
    assert np.array_equal(pseudoinverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


def test_pinv_orthonormal_is_transpose():
    z = seeded_orthonormal(1, 6, 3)
    assert np.allclose(pseudoinverse(z), z.T, atol=1e-14)


def test_pinv_seed7_moore_penrose():
    a = seeded_matrix(7, 4, 3)
    assert max(moore_penrose_residuals(a, pseudoinverse(a))) < 1e-10


@pytest.mark.parametrize("shape,rank", [((5, 4), 2), ((4, 6), 3), ((6, 6), 1)])
def test_pinv_rank_deficient(shape, rank):
    a = seeded_matrix(2, shape[0], rank) @ seeded_matrix(3, rank, shape[1])
    x = pseudoinverse(a)
    scale = max(1.0, np.linalg.norm(x, 2) * np.linalg.norm(a, 2))
    assert max(moore_penrose_residuals(a, x)) < 1e-10 * scale


def test_pinv_involution_full_rank():
    a = seeded_matrix(9, 6, 4)
    assert np.max(np.abs(pseudoinverse(pseudoinverse(a)) - a)) < 1e-9


def test_pinv_explicit_tolerance_zeroes_small_values():
    a = np.diag([1.0, 1e-6])
    assert np.array_equal(pseudoinverse(a, rank_tol=1e-5), np.diag([1.0, 0.0]))


def test_orthonormalize_already_orthonormal():
    z = seeded_orthonormal(6, 5, 3)
    q = orthonormalize(z).matrix
    assert np.allclose(np.abs(q.T @ z), np.eye(3), atol=1e-12)


def test_orthonormalize_single_vector():
    q = orthonormalize(np.array([[1.0], [1.0]])).matrix
    assert np.allclose(np.abs(q), 1 / np.sqrt(2))


def test_orthonormalize_seed3_range():
    a = seeded_matrix(3, 6, 3)
    q = orthonormalize(a).matrix
    assert np.max(np.abs(q.T @ q - np.eye(3))) < 1e-12
    assert np.max(np.abs(a - q @ (q.T @ a))) < 1e-10
    assert np.max(np.abs(projector_matrix(a) - q @ q.T)) < 1e-10


def test_orthonormalize_rank_deficient():
    a = np.column_stack([np.ones(4), 2 * np.ones(4)])
    with pytest.raises(RankError, match="rank 1"):
        orthonormalize(a)


def test_orthonormal_basis_invariant():
    with pytest.raises(LinAlgError):
        OrthonormalBasis(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_complement_small_cases():
    c = complement_basis(OrthonormalBasis(np.array([[1.0], [0.0]]))).matrix
    assert np.allclose(np.abs(c), [[0.0], [1.0]])
    c = complement_basis(OrthonormalBasis(np.eye(3)[:, :2])).matrix
    assert np.allclose(np.abs(c), [[0.0], [0.0], [1.0]])


def test_complement_seed11_assembled_orthogonal():
    z = OrthonormalBasis(seeded_orthonormal(11, 5, 2))
    c = complement_basis(z).matrix
    full = np.column_stack([z.matrix, c])
    assert full.shape == (5, 5)
    assert np.max(np.abs(full.T @ full - np.eye(5))) < 1e-12
    assert np.max(np.abs(z.matrix.T @ c)) < 1e-12


def test_complement_rejects_full_space():
    with pytest.raises(LinAlgError):
        complement_basis(OrthonormalBasis(np.eye(3)))


def test_csv_round_trip_is_exact(tmp_path):
    a = seeded_matrix(4, 3, 5) * np.array([1e-300, 1.0, 1e300, np.pi, -0.1])
    path = tmp_path / "a.csv"
    write_csv(a, path)
    assert np.array_equal(read_csv(path), a)
    assert np.array_equal(read_csv(io.StringIO(write_csv(a))), a)
