import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowrank_bounds.schatten import (
    INF,
    SchattenIndex,
    frobenius_norm,
    nuclear_norm,
    schatten_norm,
    schatten_norm_of_singular_values,
    two_norm,
)
from lowrank_bounds.dense_core import svd
from oracles import oracle_singular_values, seeded_matrix, seeded_orthonormal

PS = [SchattenIndex(1), SchattenIndex(2), SchattenIndex(3), SchattenIndex(4), INF]


@pytest.mark.parametrize(
    "raw,expected",
    [(1, SchattenIndex(1)), ("inf", INF), (math.inf, INF), ("fro", SchattenIndex(2)), ("nuc", SchattenIndex(1)), (4.0, SchattenIndex(4))],
)
def test_parse(raw, expected):
    assert SchattenIndex.parse(raw) == expected


@pytest.mark.parametrize("bad", [0, -2, 1.5, "x", True])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        SchattenIndex.parse(bad)


def test_index_parity_and_half():
    assert SchattenIndex(4).is_even and not SchattenIndex(3).is_even and not INF.is_even
    assert SchattenIndex(4).half() == SchattenIndex(2)
    assert INF.half() == INF
    with pytest.raises(ValueError, match="odd"):
        SchattenIndex(3).half()
    assert str(INF) == "inf" and str(SchattenIndex(6)) == "6"


def test_small_examples():
    assert schatten_norm(np.diag([3.0, 4.0]), 2) == pytest.approx(5.0, abs=1e-15)
    assert schatten_norm(np.eye(3), 1) == pytest.approx(3.0, abs=1e-15)
    assert schatten_norm_of_singular_values([1, 1, 1], INF) == 1.0
    assert schatten_norm_of_singular_values([0, 0], 1) == 0.0


def test_seed42_p4_matches_oracle():
    a = seeded_matrix(42, 5, 4)
    s = oracle_singular_values(a)
    assert abs(schatten_norm(a, 4) - np.sum(s**4) ** 0.25) < 1e-10


def test_sigma_path_matches_matrix_path():
    a = seeded_matrix(42, 5, 4)
    s = svd(a).singular_values
    assert abs(schatten_norm_of_singular_values(s, 3) - schatten_norm(a, 3)) < 1e-12


def test_named_norms_agree_with_numpy():
    a = seeded_matrix(1, 6, 4)
    assert two_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-13)
    assert frobenius_norm(a) == pytest.approx(np.linalg.norm(a, "fro"), rel=1e-13)
    assert nuclear_norm(a) == pytest.approx(np.linalg.norm(a, "nuc"), rel=1e-13)


def test_negative_singular_value_rejected():
    with pytest.raises(ValueError):
        schatten_norm_of_singular_values([1.0, -0.5], 2)


def test_large_p_does_not_overflow():
    s = [1e200, 1e200]
    assert schatten_norm_of_singular_values(s, 50) == pytest.approx(1e200 * 2 ** (1 / 50))


@pytest.mark.parametrize("seed", range(5))
def test_monotone_in_p(seed):
    a = seeded_matrix(seed, 6, 5)
    values = [schatten_norm(a, p) for p in [1, 2, 3, 4, 8, INF]]
    assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))


@pytest.mark.parametrize("p", PS, ids=str)
def test_unitary_invariance(p):
    a = seeded_matrix(3, 4, 3)
    q1 = seeded_orthonormal(4, 7, 4)
    q2 = seeded_orthonormal(5, 5, 3)
    base = schatten_norm(a, p)
    assert abs(schatten_norm(q1 @ a @ q2.T, p) - base) <= 1e-10 * base


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(PS))
def test_submultiplicative_property(seed, p):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((4, 3))
    b = rng.standard_normal((3, 5))
    c = rng.standard_normal((2, 4))
    scale = schatten_norm(a, p) * max(1.0, schatten_norm(b, p), schatten_norm(c, INF) * schatten_norm(b, INF))
    assert schatten_norm(a @ b, p) <= schatten_norm(a, p) * schatten_norm(b, p) + 1e-10 * scale
    strong = schatten_norm(c, INF) * schatten_norm(b, INF) * schatten_norm(a, p)
    assert schatten_norm(c @ a @ b, p) <= strong + 1e-10 * scale


@pytest.mark.parametrize("p", [2, 4, 6, INF], ids=str)
def test_q_norm_identity(p):
    m = seeded_matrix(8, 5, 7)
    p = SchattenIndex.parse(p)
    lhs = schatten_norm(m, p) ** 2
    assert abs(lhs - schatten_norm(m @ m.T, p.half())) <= 1e-10 * lhs


def test_frobenius_cross_check_catches_mismatch(monkeypatch):
    import lowrank_bounds.schatten as mod

    class Fake:
        singular_values = np.array([1.0])

    monkeypatch.setattr(mod, "svd", lambda a: Fake())
    with pytest.raises(ArithmeticError, match="cross-check"):
        mod.schatten_norm(np.array([[3.0, 4.0]]), 2)
