"""Finitely generated subgroups of Q^n and positive definite quadratic forms.

This is the classical engine underneath S-adic enumeration: Hermite and
Smith normal forms, LLL, Fincke-Pohst enumeration and exact closest-vector
search.  All arithmetic is exact.  Enumeration chooses integer ranges from
exact integer square roots and re-checks every candidate with rationals, so
no floating point decides membership.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import _matrix as mx
from .errors import InconsistentConditionsError, NotPositiveDefiniteError, SingularMatrixError
from .exactnum import as_fraction, valuation

__all__ = [
    "HNFResult",
    "IntegerLattice",
    "LLLResult",
    "QuadForm",
    "closest_vector",
    "complete_basis",
    "enumerate_quadratic",
    "hnf",
    "intersect_local_conditions",
    "left_kernel",
    "lll",
    "saturate",
    "snf",
]


# ---------------------------------------------------------------------------
# integer normal forms


def _xgcd(a: int, b: int):
    """(g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class HNFResult:
    """Row Hermite normal form ``h`` (nonzero rows only) with ``transform @ A``
    equal to ``h`` stacked over zero rows; ``transform`` is unimodular."""

    h: tuple
    transform: tuple
    rank: int

    @property
    def kernel(self) -> tuple:
        """Z-basis of the left kernel {y : y A = 0}."""
        return self.transform[self.rank:]


def hnf(matrix: Sequence[Sequence[int]]) -> HNFResult:
    """Row-style Hermite normal form of an integer matrix.

    Pivots are positive, entries above a pivot lie in [0, pivot) and rows are
    in echelon order.
    """
    a = [[int(x) for x in row] for row in matrix]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    row = 0
    for col in range(n):
        if row == m:
            break
        for i in range(row + 1, m):
            if a[i][col] == 0:
                continue
            p, q = a[row][col], a[i][col]
            g, x, y = _xgcd(p, q)
            s, t = -q // g, p // g
            a[row], a[i] = ([x * r1 + y * r2 for r1, r2 in zip(a[row], a[i])],
                            [s * r1 + t * r2 for r1, r2 in zip(a[row], a[i])])
            u[row], u[i] = ([x * r1 + y * r2 for r1, r2 in zip(u[row], u[i])],
                            [s * r1 + t * r2 for r1, r2 in zip(u[row], u[i])])
        piv = a[row][col]
        if piv == 0:
            continue
        if piv < 0:
            a[row] = [-x for x in a[row]]
            u[row] = [-x for x in u[row]]
            piv = -piv
        for i in range(row):
            q = a[i][col] // piv
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[row])]
                u[i] = [x - q * y for x, y in zip(u[i], u[row])]
        row += 1
    return HNFResult(tuple(tuple(r) for r in a[:row]), tuple(tuple(r) for r in u), row)


def left_kernel(matrix: Sequence[Sequence[int]]) -> tuple:
    """Z-basis (in HNF) of {y in Z^m : y A = 0}."""
    ker = hnf(matrix).kernel
    return hnf(ker).h if ker else ()


def snf(matrix: Sequence[Sequence[int]]) -> list:
    """Smith invariant factors d_1 | d_2 | ... (length min(m, n), zeros last)."""
    a = [[int(x) for x in row] for row in matrix]
    m = len(a)
    n = len(a[0]) if m else 0
    out = []
    t = 0
    while t < min(m, n):
        entries = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n) if a[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            piv = a[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = a[i][t] // piv
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = a[t][j] // piv
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                if a[t][j]:
                    dirty = True
            if not dirty:
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % piv), None)
                if bad is None:
                    break
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                dirty = True
            # move the smallest nonzero entry of row t / column t into the pivot
            cand = [(abs(a[i][t]), i, t) for i in range(t, m) if a[i][t]]
            cand += [(abs(a[t][j]), t, j) for j in range(t, n) if a[t][j]]
            _, i, j = min(cand)
            a[t], a[i] = a[i], a[t]
            for row in a:
                row[t], row[j] = row[j], row[t]
        out.append(abs(a[t][t]))
        t += 1
    return out + [0] * (min(m, n) - len(out))


# ---------------------------------------------------------------------------
# lattices in Q^n


class IntegerLattice:
    """Z-span of rational rows in Q^n, stored as its canonical HNF basis.

    Two lattices are equal iff their stored bases are equal.
    """

    __slots__ = ("basis", "n")

    def __init__(self, generators: Iterable[Sequence], n: Optional[int] = None):
        gens = [mx.vec(g) for g in generators]
        if n is None:
            if not gens:
                raise ValueError("dimension required for the zero lattice")
            n = len(gens[0])
        self.n = n
        if not gens:
            self.basis = ()
            return
        ints, d = mx.to_int_rows(gens)
        h = hnf(ints).h
        self.basis = tuple(tuple(Fraction(x, d) for x in row) for row in h)

    @classmethod
    def standard(cls, n: int) -> "IntegerLattice":
        return cls(mx.identity(n))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def full_rank(self) -> bool:
        return self.rank == self.n

    def __eq__(self, other):
        return isinstance(other, IntegerLattice) and self.n == other.n and self.basis == other.basis

    def __hash__(self):
        return hash((self.n, self.basis))

    def __repr__(self):
        rows = ", ".join("(" + ", ".join(map(str, r)) + ")" for r in self.basis)
        return f"IntegerLattice([{rows}])"

    def coordinates(self, v) -> Optional[tuple]:
        """Coordinates of v in the stored basis, or None if v is outside the span."""
        v = mx.vec(v)
        if not self.basis:
            return () if all(x == 0 for x in v) else None
        if self.full_rank:
            return mx.solve_left(self.basis, v)
        # echelon basis: solve pivot by pivot
        coords = []
        rest = v
        for row in self.basis:
            piv = next(j for j, x in enumerate(row) if x != 0)
            c = rest[piv] / row[piv]
            coords.append(c)
            rest = mx.sub(rest, mx.scale(c, row))
        return tuple(coords) if all(x == 0 for x in rest) else None

    def __contains__(self, v) -> bool:
        c = self.coordinates(v)
        return c is not None and all(x.denominator == 1 for x in c)

    def __add__(self, other: "IntegerLattice") -> "IntegerLattice":
        return IntegerLattice(self.basis + other.basis, self.n)

    def scaled(self, c) -> "IntegerLattice":
        c = as_fraction(c)
        return IntegerLattice([mx.scale(c, r) for r in self.basis], self.n)

    def dual(self) -> "IntegerLattice":
        if not self.full_rank:
            raise SingularMatrixError("dual of a lattice that is not of full rank")
        return IntegerLattice(mx.transpose(mx.inverse(self.basis)), self.n)

    def intersect(self, other: "IntegerLattice") -> "IntegerLattice":
        """Intersection of two full-rank lattices, via (L1 cap L2)^* = L1^* + L2^*."""
        return (self.dual() + other.dual()).dual()

    def determinant(self) -> Fraction:
        """|det| of the basis (index-style covolume for a full-rank lattice)."""
        if not self.full_rank:
            raise SingularMatrixError("determinant of a lattice that is not of full rank")
        return abs(mx.det(self.basis))

    def gram(self, form: "QuadForm") -> tuple:
        b = self.basis
        return mx.matmul(mx.matmul(b, form.gram), mx.transpose(b))


# ---------------------------------------------------------------------------
# quadratic forms


def ldl(a: Sequence[Sequence[Fraction]]):
    """Exact decomposition Q(x) = sum_i d_i (x_i + sum_{j>i} L[j][i] x_j)^2.

    Raises NotPositiveDefiniteError unless every pivot d_i is positive.
    """
    m = len(a)
    L = [[Fraction(0)] * m for _ in range(m)]
    d = [Fraction(0)] * m
    for j in range(m):
        L[j][j] = Fraction(1)
        d[j] = a[j][j] - sum((L[j][i] ** 2 * d[i] for i in range(j)), Fraction(0))
        if d[j] <= 0:
            raise NotPositiveDefiniteError(f"pivot {j} is {d[j]}")
        for k in range(j + 1, m):
            L[k][j] = (a[k][j] - sum((L[k][i] * L[j][i] * d[i] for i in range(j)), Fraction(0))) / d[j]
    return d, L


class QuadForm:
    """Positive definite rational quadratic form Q(a) = a G a^T on Q^n."""

    __slots__ = ("gram",)

    def __init__(self, gram: Sequence[Sequence]):
        g = mx.mat(gram)
        n = len(g)
        if any(len(r) != n for r in g):
            raise ValueError("Gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(i)):
            raise ValueError("Gram matrix must be symmetric")
        ldl(g)
        self.gram = g

    @classmethod
    def identity(cls, n: int) -> "QuadForm":
        return cls(mx.identity(n))

    @classmethod
    def from_matrix(cls, g: Sequence[Sequence]) -> "QuadForm":
        """The form a -> ||a g||^2."""
        g = mx.mat(g)
        return cls(mx.gram(g))

    @property
    def n(self) -> int:
        return len(self.gram)

    def __call__(self, a) -> Fraction:
        return mx.qform(mx.vec(a), self.gram)


# ---------------------------------------------------------------------------
# LLL


def _gso(a):
    m = len(a)
    mu = [[Fraction(0)] * m for _ in range(m)]
    b = [Fraction(0)] * m
    for i in range(m):
        for j in range(i):
            mu[i][j] = (a[i][j] - sum((mu[j][k] * mu[i][k] * b[k] for k in range(j)), Fraction(0))) / b[j]
        b[i] = a[i][i] - sum((mu[i][k] ** 2 * b[k] for k in range(i)), Fraction(0))
        if b[i] <= 0:
            raise NotPositiveDefiniteError("form is not positive definite on the lattice")
    return mu, b


def _round(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def lll_gram(a: Sequence[Sequence[Fraction]], delta: Fraction = Fraction(3, 4)):
    """LLL on a Gram matrix; returns the unimodular transform T (rows = new basis)."""
    delta = as_fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    m = len(a)
    t = [[int(i == j) for j in range(m)] for i in range(m)]
    g = [list(r) for r in a]

    def regram():
        tt = [[Fraction(x) for x in r] for r in t]
        return [list(r) for r in mx.matmul(mx.matmul(tt, a), mx.transpose(tt))]

    mu, b = _gso(g)
    k = 1
    while k < m:
        for j in range(k - 1, -1, -1):
            q = _round(mu[k][j])
            if q:
                t[k] = [x - q * y for x, y in zip(t[k], t[j])]
                g = regram()
                mu, b = _gso(g)
        if b[k] >= (delta - mu[k][k - 1] ** 2) * b[k - 1]:
            k += 1
        else:
            t[k], t[k - 1] = t[k - 1], t[k]
            g = regram()
            mu, b = _gso(g)
            k = max(k - 1, 1)
    return tuple(tuple(r) for r in t)


@dataclass(frozen=True)
class LLLResult:
    basis: tuple
    transform: tuple


def lll(lattice: IntegerLattice, form: QuadForm, delta=Fraction(3, 4)) -> LLLResult:
    """delta-LLL-reduced basis of ``lattice`` with respect to ``form``."""
    t = lll_gram(lattice.gram(form), delta)
    tf = tuple(tuple(Fraction(x) for x in r) for r in t)
    return LLLResult(mx.matmul(tf, lattice.basis) if lattice.basis else (), t)


# ---------------------------------------------------------------------------
# Fincke-Pohst


def _int_interval(center: Fraction, s: Fraction):
    """Integers t with (t - center)^2 <= s."""
    if s < 0:
        return range(0)
    q = math.isqrt(s.numerator // s.denominator)
    lo = math.floor(center) - q - 1
    hi = math.ceil(center) + q + 1
    while lo <= hi and (lo - center) ** 2 > s:
        lo += 1
    while hi >= lo and (hi - center) ** 2 > s:
        hi -= 1
    return range(lo, hi + 1)


def fincke_pohst(d, L, bound: Fraction, center=None, strict: bool = True):
    """All integer x with sum_i d_i (x_i - c_i + sum_{j>i} L[j][i](x_j - c_j))^2 below ``bound``.

    Yields ``(x, value)``; ``strict`` selects < versus <=.
    """
    m = len(d)
    c = [Fraction(0)] * m if center is None else [Fraction(v) for v in center]
    x = [0] * m
    out = []

    def rec(i, partial):
        shift = c[i] - sum((L[j][i] * (x[j] - c[j]) for j in range(i + 1, m)), Fraction(0))
        for t in _int_interval(shift, (bound - partial) / d[i]):
            val = partial + d[i] * (t - shift) ** 2
            x[i] = t
            if i == 0:
                if val < bound or (not strict and val == bound):
                    out.append((tuple(x), val))
            else:
                rec(i - 1, val)
        x[i] = 0

    if m == 0:
        if Fraction(0) < bound or not strict:
            out.append(((), Fraction(0)))
        return out
    rec(m - 1, Fraction(0))
    return out


def _enumerate(basis, form_gram, bound, strict=True, delta=Fraction(3, 4)):
    """Nonzero points a of the Z-span of ``basis`` with a G a^T below bound, as (a, value)."""
    if not basis:
        return []
    a = mx.matmul(mx.matmul(basis, form_gram), mx.transpose(basis))
    t = lll_gram(a, delta)
    tf = tuple(tuple(Fraction(x) for x in r) for r in t)
    rb = mx.matmul(tf, basis)
    ra = mx.matmul(mx.matmul(tf, a), mx.transpose(tf))
    d, L = ldl(ra)
    pts = []
    for x, val in fincke_pohst(d, L, Fraction(bound), strict=strict):
        if any(x):
            pts.append((mx.vecmat(tuple(Fraction(v) for v in x), rb), val))
    pts.sort(key=lambda p: (p[1], p[0]))
    return pts


def enumerate_quadratic(lattice: IntegerLattice, form: QuadForm, bound, strict: bool = True) -> list:
    """Nonzero vectors a of ``lattice`` with Q(a) < bound (<= if not strict).

    Sorted by Q-value then lexicographically; zero is never returned.
    """
    bound = as_fraction(bound)
    if bound <= 0:
        raise ValueError("bound must be positive")
    return [a for a, _ in _enumerate(lattice.basis, form.gram, bound, strict)]


def closest_vector(lattice: IntegerLattice, form: QuadForm, target):
    """Exact minimiser of Q(target - a) over a in ``lattice``.

    Returns ``(a, Q(target - a))``; ties go to the lexicographically
    smallest a.
    """
    t = mx.vec(target)
    return _cvp(lattice.basis, form.gram, t, lattice.n)


def _cvp(basis, g, t, n):
    if not basis:
        return tuple(Fraction(0) for _ in range(n)), mx.qform(t, g)
    a = mx.matmul(mx.matmul(basis, g), mx.transpose(basis))
    tr = lll_gram(a)
    tf = tuple(tuple(Fraction(x) for x in r) for r in tr)
    rb = mx.matmul(tf, basis)
    ra = mx.matmul(mx.matmul(tf, a), mx.transpose(tf))
    b = mx.vecmat(t, mx.matmul(g, mx.transpose(rb)))
    y = mx.solve_left(ra, b)
    offset = mx.qform(t, g) - mx.qform(y, ra)
    d, L = ldl(ra)
    m = len(d)
    # Babai nearest plane for an initial bound
    x = [0] * m
    val = Fraction(0)
    for i in range(m - 1, -1, -1):
        shift = y[i] - sum((L[j][i] * (x[j] - y[j]) for j in range(i + 1, m)), Fraction(0))
        x[i] = _round(shift)
        val += d[i] * (x[i] - shift) ** 2
    best = None
    for xx, v in fincke_pohst(d, L, val, center=y, strict=False):
        pt = mx.vecmat(tuple(Fraction(c) for c in xx), rb)
        key = (v, pt)
        if best is None or key < best:
            best = key
    return best[1], offset + best[0]


# ---------------------------------------------------------------------------
# saturation and local conditions


def saturate(rows: Sequence[Sequence]) -> tuple:
    """Integer basis (HNF) of span_Q(rows) cap Z^n."""
    rows = [mx.vec(r) for r in rows if any(x != 0 for x in r)]
    if not rows:
        return ()
    ints, _ = mx.to_int_rows(rows)
    n = len(ints[0])
    k = left_kernel(mx.transpose(ints))  # x with A x^T = 0
    if not k:
        return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return left_kernel(mx.transpose(k))


def complete_basis(w: Sequence[Sequence[int]], n: int) -> tuple:
    """Unimodular n x n integer matrix whose first k rows span the saturated lattice Z-span(w)."""
    if not w:
        return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    res = hnf(mx.transpose(w))
    u = tuple(tuple(Fraction(x) for x in r) for r in res.transform)
    uinv_t = mx.transpose(mx.inverse(u))
    out = tuple(tuple(int(x) for x in r) for r in uinv_t)
    k = len(w)
    if IntegerLattice(out[:k], n) != IntegerLattice(w, n):
        raise ValueError("rows do not span a saturated lattice")
    return out


def _local_lattice(n: int, p: int, k: int, c):
    """The lattice {a : a integral away from p, ||a c||_p <= p^-k}, with exponents
    (N, K) such that p^N Z_p^n <= L_p <= p^-K Z_p^n."""
    cinv = mx.inverse(c)
    gens = []
    for row in cinv:
        row = mx.scale(Fraction(p) ** k, row)
        den = mx.common_denominator([row])
        while den % p == 0:
            den //= p
        # multiplying by a p-adic unit keeps the Z_p-span
        gens.append(mx.scale(den, row))
    big_n = k - min(valuation(x, p) for r in c for x in r if x != 0)
    big_k = max(0, -(k + min(valuation(x, p) for r in cinv for x in r if x != 0)))
    gens.extend(mx.scale(Fraction(p) ** big_n, e) for e in mx.identity(n))
    return IntegerLattice(gens, n), big_n, big_k


def intersect_local_conditions(n: int, conditions: Sequence, allowed_denominator_primes: Iterable[int] = ()) -> IntegerLattice:
    """The lattice of a in Z[1/M]^n with ||a C_p||_p <= p^{-k_p} for each condition.

    ``conditions`` is a sequence of ``(p, k_p, C_p)``, one for each allowed
    denominator prime (otherwise the set is not discrete).

    Each condition gives a lattice with the right localisation at p but
    integral at every other prime; before intersecting, it is widened at
    the other denominator primes q to q^{-K_q} Z_q^n, which contains the
    target localisation there.
    """
    allowed = set(int(p) for p in allowed_denominator_primes)
    locs = {}
    for p, k, c in conditions:
        p = int(p)
        c = mx.mat(c)
        if len(c) != n or any(len(r) != n for r in c):
            raise InconsistentConditionsError(f"condition matrix at {p} has the wrong shape")
        if mx.det(c) == 0:
            raise InconsistentConditionsError(f"condition matrix at {p} is singular")
        if p in locs:
            raise InconsistentConditionsError(f"two conditions at {p}")
        if p not in allowed:
            raise InconsistentConditionsError(f"condition at {p}, which is not an allowed denominator prime")
        locs[p] = _local_lattice(n, p, int(k), c)
    missing = allowed - set(locs)
    if missing:
        raise InconsistentConditionsError(f"no condition at denominator primes {sorted(missing)}; set is not discrete")
    if not locs:
        return IntegerLattice.standard(n)
    lat = None
    for p, (loc, big_n, _) in locs.items():
        widen = Fraction(p) ** big_n
        for q, (_, _, big_k) in locs.items():
            if q != p:
                widen *= Fraction(q) ** -big_k
        if len(locs) > 1:
            loc = loc + IntegerLattice(mx.scale(widen, e) for e in mx.identity(n))
        lat = loc if lat is None else lat.intersect(loc)
    return lat
