"""Exact linear algebra over Z and Q on small dense matrices.

Vectors are tuples and matrices are tuples of row tuples.  Integer data
stays integer; rational results use :class:`fractions.Fraction`.  No
floating point appears anywhere in this package.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence

Vec = tuple
Mat = tuple


def vec(xs: Iterable) -> Vec:
    return tuple(xs)


def vadd(a: Sequence, b: Sequence) -> Vec:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vsub(a: Sequence, b: Sequence) -> Vec:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vscale(c, a: Sequence) -> Vec:
    return tuple(c * x for x in a)


def vneg(a: Sequence) -> Vec:
    return tuple(-x for x in a)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b, strict=True))


def is_zero(a: Sequence) -> bool:
    return all(x == 0 for x in a)


def as_integer_vector(a: Sequence) -> Vec:
    """Clear denominators and return the primitive-scaled integer vector
    pointing in the same direction (input must be nonzero)."""
    fracs = [Fraction(x) for x in a]
    lcm = 1
    for f in fracs:
        d = f.denominator
        lcm = lcm * d // gcd(lcm, d)
    ints = [int(f * lcm) for f in fracs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no direction")
    return tuple(x // g for x in ints)


def primitive(a: Sequence) -> Vec:
    """Primitive integer vector on the same ray as ``a``."""
    return as_integer_vector(a)


def scale_between(a: Sequence, b: Sequence) -> Optional[Fraction]:
    """Return c with ``a = c * b``, or None if not proportional."""
    c = None
    for x, y in zip(a, b, strict=True):
        if y == 0:
            if x != 0:
                return None
            continue
        r = Fraction(x, y) if not isinstance(x, Fraction) else x / y
        if c is None:
            c = Fraction(r)
        elif c != r:
            return None
    if c is None:
        # b == 0: proportional only if a == 0 too, scale is ambiguous
        return Fraction(0) if is_zero(a) else None
    return c


def _rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    m = [[Fraction(x) for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    _, pivots = _rref(rows)
    return len(pivots)


def solve(rows: Sequence[Sequence], rhs: Sequence) -> Optional[Vec]:
    """Solve ``rows @ x = rhs`` exactly.

    Returns a solution tuple of Fractions, or None when inconsistent.
    Raises ValueError when the solution exists but is not unique; callers
    in this package only solve systems whose rows span the full space.
    """
    if not rows:
        if any(b != 0 for b in rhs):
            return None
        raise ValueError("underdetermined empty system")
    ncols = len(rows[0])
    aug = [list(row) + [b] for row, b in zip(rows, rhs, strict=True)]
    m, pivots = _rref(aug)
    for i in range(len(m)):
        if all(x == 0 for x in m[i][:ncols]) and m[i][ncols] != 0:
            return None
    if len(pivots) < ncols or (pivots and pivots[-1] == ncols):
        # pivot in the rhs column is the inconsistent case caught above
        if ncols in pivots:
            return None
        raise ValueError("underdetermined system")
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][ncols]
    return tuple(x)


def rational_kernel(rows: Sequence[Sequence]) -> list[Vec]:
    """Basis of the right kernel {x : rows @ x = 0} over Q."""
    if not rows:
        raise ValueError("kernel of an empty matrix needs an ambient dimension")
    ncols = len(rows[0])
    m, pivots = _rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, c in enumerate(pivots):
            x[c] = -m[i][f]
        basis.append(tuple(x))
    return basis


def kernel_in_dim(rows: Sequence[Sequence], dim: int) -> list[Vec]:
    """Right kernel basis, valid also for an empty list of rows."""
    if not rows:
        return [tuple(Fraction(1) if j == i else Fraction(0) for j in range(dim))
                for i in range(dim)]
    return rational_kernel(rows)


def det(rows: Sequence[Sequence]) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    m = [[Fraction(x) for x in row] for row in rows]
    sign = 1
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        result *= m[c][c]
        pv = m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / pv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return sign * result


def diagonalize_integer(a: Sequence[Sequence]) -> tuple[Mat, Mat, Mat]:
    """Return (d, s, t) with ``s @ a @ t = d`` diagonal and s, t unimodular.

    Elementary-operation reduction over Z.  The diagonal entries are not
    divisibility-normalized; everything here only needs the zero pattern
    and the unimodular change of basis.
    """
    m = [list(map(int, row)) for row in a]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    s = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    t = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        s[i], s[j] = s[j], s[i]

    def swap_cols(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in t:
            row[i], row[j] = row[j], row[i]

    def add_row(i, j, c):
        # row_i += c * row_j
        m[i] = [x + c * y for x, y in zip(m[i], m[j])]
        s[i] = [x + c * y for x, y in zip(s[i], s[j])]

    def add_col(i, j, c):
        # col_i += c * col_j
        for row in m:
            row[i] += c * row[j]
        for row in t:
            row[i] += c * row[j]

    def negate_row(i):
        m[i] = [-x for x in m[i]]
        s[i] = [-x for x in s[i]]

    k = 0
    while k < min(nrows, ncols):
        # find a nonzero pivot of minimal absolute value
        best = None
        for i in range(k, nrows):
            for j in range(k, ncols):
                if m[i][j] != 0 and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(k, best[0])
        swap_cols(k, best[1])
        while True:
            dirty = False
            for i in range(k + 1, nrows):
                if m[i][k] != 0:
                    q = m[i][k] // m[k][k]
                    add_row(i, k, -q)
                    if m[i][k] != 0:
                        swap_rows(k, i)
                        dirty = True
            for j in range(k + 1, ncols):
                if m[k][j] != 0:
                    q = m[k][j] // m[k][k]
                    add_col(j, k, -q)
                    if m[k][j] != 0:
                        swap_cols(k, j)
                        dirty = True
            if not dirty:
                break
        if m[k][k] < 0:
            negate_row(k)
        k += 1
    return (tuple(map(tuple, m)), tuple(map(tuple, s)), tuple(map(tuple, t)))


def integer_kernel(rows: Sequence[Sequence], dim: int) -> list[Vec]:
    """Basis of the saturated lattice {x in Z^dim : rows @ x = 0}."""
    if not rows:
        return [tuple(int(j == i) for j in range(dim)) for i in range(dim)]
    d, _s, t = diagonalize_integer(rows)
    r = sum(1 for k in range(min(len(d), dim)) if d[k][k] != 0)
    # kernel = span of columns of t past the rank
    return [tuple(t[i][j] for i in range(dim)) for j in range(r, dim)]


def saturation(rows: Sequence[Sequence], dim: int) -> list[Vec]:
    """Basis of the saturation in Z^dim of the row lattice."""
    rows = [tuple(map(int, r)) for r in rows if not is_zero(r)]
    if not rows:
        return []
    complement = integer_kernel(rows, dim)
    if not complement:
        return [tuple(int(j == i) for j in range(dim)) for i in range(dim)]
    return integer_kernel(complement, dim)


def quotient_matrix(sub_rows: Sequence[Sequence], dim: int) -> Mat:
    """Matrix q (dim x k) of the projection Z^dim -> Z^dim / sat(sub).

    The map sends a row vector x to ``x @ q``; its kernel is exactly the
    saturation of the row lattice spanned by ``sub_rows``.
    """
    sat = saturation(sub_rows, dim)
    k = len(sat)
    if k == 0:
        return tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim))
    d, _s, t = diagonalize_integer(sat)
    for i in range(k):
        if d[i][i] != 1:
            raise ValueError("saturated lattice must have unit elementary divisors")
    # rows of t^{-1} form a basis of Z^dim whose first k rows span sat;
    # coordinates of x in that basis are x @ t, so drop the first k.
    return tuple(tuple(t[i][j] for j in range(k, dim)) for i in range(dim))


def apply_matrix(x: Sequence, m: Sequence[Sequence]) -> Vec:
    """Row vector times matrix."""
    ncols = len(m[0]) if m else 0
    return tuple(sum(x[i] * m[i][j] for i in range(len(x))) for j in range(ncols))


def coordinates_in(basis: Sequence[Sequence], x: Sequence) -> Optional[Vec]:
    """Coordinates c with ``c @ basis = x``, or None if x is outside the span."""
    if not basis:
        return () if is_zero(x) else None
    cols = list(zip(*basis))
    sol = solve(cols, x)
    return sol
