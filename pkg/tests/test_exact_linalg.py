import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from grasstensor.exact_linalg import (
    ExactMatrix,
    Subspace,
    det,
    intersect,
    minor,
    rank,
    right_kernel,
    rref,
    rref_with_transform,
    span_join,
    to_scalar,
)
from conftest import laplace_det, leibniz_det

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=7)


def square(n, elements=fractions):
    return st.lists(st.lists(elements, min_size=n, max_size=n), min_size=n, max_size=n)


def matrices(max_rows=5, max_cols=6, elements=st.integers(-4, 4)):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(elements, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_to_scalar_rejects_floats_and_bools():
    assert to_scalar("3/6") == Fraction(1, 2)
    with pytest.raises(TypeError):
        to_scalar(0.5)
    with pytest.raises(TypeError):
        to_scalar(True)


@given(st.integers(1, 5).flatmap(square))
def test_det_matches_laplace(rows):
    assert det(ExactMatrix(rows)) == laplace_det(rows)


@given(st.integers(1, 4).flatmap(lambda n: square(n, st.integers(-9, 9))))
def test_det_matches_leibniz_on_integers(rows):
    assert det(ExactMatrix(rows)) == leibniz_det(rows)


def test_det_singular_and_empty():
    assert det(ExactMatrix([[1, 2], [2, 4]])) == 0
    assert det(ExactMatrix([[0, 1], [1, 0]])) == -1
    with pytest.raises(ValueError):
        det(ExactMatrix([[1, 2, 3], [4, 5, 6]]))


def test_minor_selection_is_one_based():
    m = ExactMatrix([[1, 2, 3], [4, 5, 6], [7, 8, 10]])
    assert minor(m, [1, 2], [1, 3]) == 1 * 6 - 3 * 4
    with pytest.raises(ValueError):
        minor(m, [2, 1], [1, 2])
    with pytest.raises(IndexError):
        minor(m, [1, 4], [1, 2])


@given(st.integers(1, 4).flatmap(square), st.integers(1, 4).flatmap(square))
def test_det_multiplicative(a, b):
    n = min(len(a), len(b))
    A = ExactMatrix([r[:n] for r in a[:n]])
    B = ExactMatrix([r[:n] for r in b[:n]])
    assert det(A @ B) == det(A) * det(B)


@given(matrices())
def test_rank_nullity(rows):
    m = ExactMatrix(rows)
    assert rank(m) + right_kernel(m).dim == m.ncols
    assert rank(m) == rank(m.T)


@given(matrices())
def test_kernel_vectors_are_annihilated(rows):
    m = ExactMatrix(rows)
    for v in right_kernel(m).vectors():
        assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in m.rows)


@given(matrices())
def test_rref_transform(rows):
    m = ExactMatrix(rows)
    r, piv, e = rref_with_transform(m)
    assert e @ m == r
    assert det(e) != 0
    assert r == rref(m)[0]
    assert len(piv) == rank(m)
    for i, p in enumerate(piv):
        assert r[i, p - 1] == 1
        assert all(r[j, p - 1] == 0 for j in range(r.nrows) if j != i)


@given(st.integers(1, 4).flatmap(square))
def test_inverse_round_trip(rows):
    m = ExactMatrix(rows)
    if det(m) == 0:
        with pytest.raises(ValueError):
            m.inverse()
    else:
        assert m @ m.inverse() == ExactMatrix.identity(m.nrows)


def test_solve_inconsistent():
    m = ExactMatrix([[1, 1], [2, 2]])
    with pytest.raises(ValueError):
        m.solve(ExactMatrix([[1], [3]]))
    x = m.solve(ExactMatrix([[1], [2]]))
    assert m @ x == ExactMatrix([[1], [2]])


@given(matrices())
def test_json_round_trip(rows):
    m = ExactMatrix(rows).scale(Fraction(2, 3))
    assert ExactMatrix.from_json(m.to_json()) == m


def test_subspace_basis_is_canonical():
    a = Subspace(3, [(1, 2, 0), (0, 1, 1)])
    b = Subspace(3, [(1, 3, 1), (2, 5, 1)])
    assert a == b and hash(a) == hash(b)
    assert a.contains((1, 1, -1))
    assert not a.contains((0, 0, 1))


def _random_subspace(n, d, rng):
    return Subspace(n, [[rng.randint(-3, 3) for _ in range(n)] for _ in range(d)])


def test_grassmann_dimension_formula():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(2, 7)
        u = _random_subspace(n, rng.randint(0, n), rng)
        v = _random_subspace(n, rng.randint(0, n), rng)
        w = intersect(u, v)
        assert span_join(u, v).dim + w.dim == u.dim + v.dim
        for x in w.vectors():
            assert u.contains(x) and v.contains(x)
