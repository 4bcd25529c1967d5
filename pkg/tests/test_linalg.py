from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horomori.linalg import (
    apply_matrix,
    coordinates_in,
    det,
    diagonalize_integer,
    dot,
    integer_kernel,
    is_zero,
    kernel_in_dim,
    primitive,
    quotient_matrix,
    rank,
    rational_kernel,
    saturation,
    scale_between,
    solve,
)

small_ints = st.integers(min_value=-6, max_value=6)


def matrices(rows, cols):
    return st.lists(st.lists(small_ints, min_size=cols, max_size=cols),
                    min_size=rows, max_size=rows).map(lambda m: tuple(map(tuple, m)))


def test_solve_square():
    assert solve(((1, 0), (0, 2)), (3, 4)) == (3, 2)


def test_solve_inconsistent():
    assert solve(((1, 1), (2, 2)), (1, 3)) is None


def test_solve_underdetermined_raises():
    with pytest.raises(ValueError):
        solve(((1, 1),), (1,))


def test_primitive_and_scale():
    assert primitive((4, -6)) == (2, -3)
    assert primitive((Q(1, 2), Q(3, 2))) == (1, 3)
    assert scale_between((4, 6), (2, 3)) == 2
    assert scale_between((4, 5), (2, 3)) is None
    assert scale_between((0, 0), (0, 0)) == 0


def test_det():
    assert det(((1, 2), (3, 4))) == -2
    assert det(()) == 1


def test_integer_kernel_is_saturated():
    basis = integer_kernel(((1, 2),), 2)
    assert len(basis) == 1
    assert primitive(basis[0]) in ((2, -1), (-2, 1))


def test_quotient_matrix_kills_exactly_the_sublattice():
    q = quotient_matrix(((1, 2),), 2)
    assert apply_matrix((1, 2), q) == (0,)
    # the quotient map is surjective onto Z: some vector maps to a unit
    images = {abs(apply_matrix(v, q)[0]) for v in [(1, 0), (0, 1), (1, 1)]}
    assert 1 in images


@given(matrices(2, 3))
@settings(max_examples=150)
def test_rational_kernel_annihilates(m):
    if all(is_zero(row) for row in m):
        return
    for k in rational_kernel(m):
        assert all(dot(row, k) == 0 for row in m)


@given(matrices(2, 4))
@settings(max_examples=150)
def test_diagonalize_is_unimodular_change_of_basis(m):
    d, s, t = diagonalize_integer(m)
    assert abs(det(s)) == 1
    assert abs(det(t)) == 1
    # s @ m @ t == d
    sm = tuple(tuple(sum(s[i][k] * m[k][j] for k in range(2)) for j in range(4))
               for i in range(2))
    smt = tuple(tuple(sum(sm[i][k] * t[k][j] for k in range(4)) for j in range(4))
                for i in range(2))
    assert smt == d
    for i in range(2):
        for j in range(4):
            if i != j:
                assert d[i][j] == 0


@given(matrices(2, 3))
@settings(max_examples=150)
def test_saturation_contains_rows(m):
    sat = saturation(m, 3)
    for row in m:
        if is_zero(row):
            continue
        c = coordinates_in(sat, row)
        assert c is not None
        assert all(x.denominator == 1 for x in c)


@given(matrices(1, 3))
@settings(max_examples=150)
def test_quotient_kernel_is_saturation(m):
    q = quotient_matrix(m, 3)
    sat = saturation(m, 3)
    for row in sat:
        assert is_zero(apply_matrix(row, q))
    assert rank(q and [list(r) for r in q]) == len(q[0]) if q and q[0] else True
