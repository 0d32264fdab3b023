"""Small dense linear algebra over Q on tuples of Fractions.

Matrices are tuples of row tuples.  Sizes here are tiny (n <= 4 or so), so
plain Gaussian elimination is the right tool.
"""

from fractions import Fraction
from math import gcd

from .errors import SingularMatrixError

F0 = Fraction(0)
F1 = Fraction(1)


def mat(rows):
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def vec(xs):
    return tuple(Fraction(x) for x in xs)


def identity(n):
    return tuple(tuple(F1 if i == j else F0 for j in range(n)) for i in range(n))


def zeros(m, n):
    return tuple(tuple(F0 for _ in range(n)) for _ in range(m))


def diag(ds):
    n = len(ds)
    return tuple(tuple(Fraction(ds[i]) if i == j else F0 for j in range(n)) for i in range(n))


def transpose(a):
    return tuple(zip(*a)) if a else ()


def matmul(a, b):
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), F0) for col in bt) for row in a)


def vecmat(v, a):
    if not a:
        return ()
    return tuple(sum((v[i] * a[i][j] for i in range(len(v))), F0) for j in range(len(a[0])))


def dot(u, v):
    return sum((x * y for x, y in zip(u, v)), F0)


def qform(v, g):
    """v g v^T."""
    return dot(vecmat(v, g), v)


def add(u, v):
    return tuple(x + y for x, y in zip(u, v))


def sub(u, v):
    return tuple(x - y for x, y in zip(u, v))


def scale(c, v):
    return tuple(c * x for x in v)


def gram(a):
    """a a^T."""
    return tuple(tuple(dot(r, s) for s in a) for r in a)


def det(a):
    n = len(a)
    m = [list(r) for r in mat(a)]
    d = F1
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return F0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] * inv
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return d


def inverse(a):
    n = len(a)
    m = [list(r) + [F1 if i == j else F0 for j in range(n)] for i, r in enumerate(mat(a))]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return tuple(tuple(row[n:]) for row in m)


def rank(rows):
    return len(echelon_pivots(rows))


def echelon_pivots(rows):
    """Indices of rows that are independent of the rows before them."""
    basis = []  # list of (pivot column, reduced row)
    keep = []
    for idx, row in enumerate(rows):
        r = list(vec(row))
        for col, b in basis:
            if r[col] != 0:
                f = r[col] / b[col]
                r = [x - f * y for x, y in zip(r, b)]
        col = next((j for j, x in enumerate(r) if x != 0), None)
        if col is not None:
            basis.append((col, r))
            keep.append(idx)
    return keep


def in_span(rows, v):
    return rank(list(rows) + [v]) == rank(rows)


def solve_left(a, b):
    """x with x a = b for an invertible square a."""
    return vecmat(b, inverse(a))


def common_denominator(rows):
    d = 1
    for row in rows:
        for x in row:
            d = d * x.denominator // gcd(d, x.denominator)
    return d


def to_int_rows(rows):
    """(integer rows, d) with rows = integer rows / d."""
    d = common_denominator(rows)
    return [[int(x * d) for x in row] for row in rows], d


def sub_mat(a, b):
    return tuple(sub(r, s) for r, s in zip(a, b))
