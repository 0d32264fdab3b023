"""Exact rationals, places of Q and exactly comparable absolute values.

Rationals are :class:`fractions.Fraction`.  Absolute values of vectors are
either rational (p-adic norms, rational Euclidean lengths) or square roots of
rationals (general Euclidean lengths); volumes additionally carry an integral
power of pi.  :class:`Magnitude` holds one such quantity and
:class:`SurdSum` a finite sum of them.  Every comparison is decided exactly:
like radicals are merged, and the remaining terms are linearly independent
over Q (pi is transcendental), so refining rational enclosures always
terminates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Optional, Union

from .errors import SadicError, UnsupportedFieldError

RationalLike = Union[int, Fraction]

__all__ = [
    "INF",
    "Magnitude",
    "Ordering",
    "Place",
    "SConfig",
    "SurdSum",
    "abs_at",
    "as_fraction",
    "compare",
    "is_prime",
    "is_square",
    "mag_max",
    "pi_bounds",
    "valuation",
]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and canonical strings ("a/b", "a") to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(p: int) -> bool:
    """Miller-Rabin with a fixed base set (deterministic below 3.3e24)."""
    if p < 2:
        return False
    for q in _MR_BASES:
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# places


@dataclass(frozen=True)
class Place:
    """A place of Q: ``p=None`` is the real place, otherwise the p-adic one."""

    p: Optional[int] = None

    def __post_init__(self):
        if self.p is not None and not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def is_infinite(self) -> bool:
        return self.p is None

    def sort_key(self):
        return (0, 0) if self.p is None else (1, self.p)

    def __str__(self):
        return "inf" if self.p is None else str(self.p)


INF = Place()


@dataclass(frozen=True)
class SConfig:
    """A finite set of places S = {inf} + primes; I_S = Z[1/M].

    The base field is Q, so there is exactly one real place (sigma = 1) and
    no complex place (tau = 0).
    """

    primes: tuple = ()

    def __post_init__(self):
        ps = tuple(int(p) for p in self.primes)
        if len(set(ps)) != len(ps):
            raise ValueError(f"primes must be distinct: {ps}")
        for p in ps:
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")
        object.__setattr__(self, "primes", tuple(sorted(ps)))

    sigma = 1
    tau = 0

    @property
    def places(self) -> tuple:
        return (INF,) + tuple(Place(p) for p in self.primes)

    @property
    def size(self) -> int:
        """|S|, the number of places."""
        return 1 + len(self.primes)

    @property
    def M(self) -> int:
        return math.prod(self.primes)

    def is_unit(self, x: RationalLike) -> bool:
        """True iff x lies in I_S^*, i.e. is +-(product of powers of S-primes)."""
        x = as_fraction(x)
        if x == 0:
            return False
        for part in (abs(x.numerator), x.denominator):
            for p in self.primes:
                while part % p == 0:
                    part //= p
            if part != 1:
                return False
        return True

    def is_integral(self, x: RationalLike) -> bool:
        """True iff x lies in I_S."""
        d = as_fraction(x).denominator
        for p in self.primes:
            while d % p == 0:
                d //= p
        return d == 1


def check_field(sigma: int, tau: int) -> None:
    if sigma != 1 or tau != 0:
        raise UnsupportedFieldError(
            f"only the rational field (sigma=1, tau=0) is instantiated, got sigma={sigma}, tau={tau}")


def valuation(x: RationalLike, p: int):
    """p-adic valuation of x; ``math.inf`` for x = 0."""
    x = as_fraction(x)
    if x == 0:
        return math.inf
    v = 0
    num, den = abs(x.numerator), x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def p_power(p: int, e: int) -> Fraction:
    return Fraction(p) ** e


# ---------------------------------------------------------------------------
# magnitudes


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def is_square(q: Fraction) -> bool:
    if q < 0:
        return False
    n, d = q.numerator, q.denominator
    return math.isqrt(n) ** 2 == n and math.isqrt(d) ** 2 == d


def _exact_sqrt(q: Fraction) -> Fraction:
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


@total_ordering
@dataclass(frozen=True)
class Magnitude:
    """A nonnegative real ``value`` or ``sqrt(value)``, times ``pi**pi_exp``.

    The constructor canonicalises: square roots of rational squares are
    unwrapped and zero drops its pi power, so structural equality coincides
    with numerical equality.
    """

    value: Fraction
    sqrt: bool = False
    pi_exp: int = 0

    def __post_init__(self):
        v = as_fraction(self.value)
        if v < 0:
            raise ValueError(f"magnitude must be nonnegative, got {v}")
        if self.pi_exp < 0:
            raise ValueError("negative pi exponents are not represented")
        sq = self.sqrt
        if sq and is_square(v):
            v, sq = _exact_sqrt(v), False
        pe = self.pi_exp if v != 0 else 0
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "sqrt", sq)
        object.__setattr__(self, "pi_exp", pe)

    @classmethod
    def of(cls, x) -> "Magnitude":
        if isinstance(x, Magnitude):
            return x
        return cls(as_fraction(x))

    @classmethod
    def from_square(cls, s: RationalLike, pi_exp: int = 0) -> "Magnitude":
        """The magnitude whose algebraic part squares to ``s``."""
        return cls(as_fraction(s), True, pi_exp)

    @property
    def sq(self) -> Fraction:
        """Square of the algebraic (pi-free) part."""
        return self.value if self.sqrt else self.value * self.value

    @property
    def is_rational(self) -> bool:
        return not self.sqrt and self.pi_exp == 0

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def rational(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.value

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Magnitude.from_square(self.sq * other.sq, self.pi_exp + other.pi_exp)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by a zero magnitude")
        if other.pi_exp > self.pi_exp and not self.is_zero:
            raise ValueError("quotient would carry a negative power of pi")
        return Magnitude.from_square(self.sq / other.sq, self.pi_exp - other.pi_exp if not self.is_zero else 0)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integral powers")
        return Magnitude.from_square(self.sq ** k, self.pi_exp * k)

    def __add__(self, other):
        return SurdSum((self,)) + other

    __radd__ = __add__

    def terms(self):
        if self.sqrt:
            return [(Fraction(1), self.value, self.pi_exp)]
        return [(self.value, Fraction(1), self.pi_exp)]

    def __eq__(self, other):
        if isinstance(other, Magnitude):
            return (self.value, self.sqrt, self.pi_exp) == (other.value, other.sqrt, other.pi_exp)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.is_rational and self.value == other
        if isinstance(other, SurdSum):
            return compare(self, other) == Ordering.EQUAL
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.sqrt, self.pi_exp))

    def __lt__(self, other):
        other = _coerce_any(other)
        if other is NotImplemented:
            return NotImplemented
        return compare(self, other) == Ordering.LESS

    def to_float(self) -> float:
        """Lossy conversion, for display only."""
        x = math.sqrt(self.value) if self.sqrt else float(self.value)
        return x * math.pi ** self.pi_exp

    def __str__(self):
        core = f"sqrt({self.value})" if self.sqrt else str(self.value)
        if self.pi_exp:
            core += "*pi" if self.pi_exp == 1 else f"*pi^{self.pi_exp}"
        return core

    def __repr__(self):
        return f"Magnitude({self})"


def _coerce(x):
    if isinstance(x, Magnitude):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Magnitude(as_fraction(x))
    return NotImplemented


def _coerce_any(x):
    if isinstance(x, SurdSum):
        return x
    return _coerce(x)


@total_ordering
class SurdSum:
    """A finite sum of magnitudes with rational coefficients (used for sums of minima)."""

    __slots__ = ("_terms",)

    def __init__(self, parts: Iterable = ()):
        terms = []
        for part in parts:
            if isinstance(part, tuple):
                c, m = part
                terms.append((as_fraction(c), Magnitude.of(m)))
            else:
                terms.append((Fraction(1), Magnitude.of(part)))
        self._terms = tuple((c, m) for c, m in terms if c != 0 and not m.is_zero)

    @property
    def parts(self):
        return self._terms

    def terms(self):
        out = []
        for c, m in self._terms:
            for c2, r, k in m.terms():
                out.append((c * c2, r, k))
        return out

    def __add__(self, other):
        if isinstance(other, SurdSum):
            return SurdSum(self._terms + other._terms)
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return SurdSum(self._terms + ((Fraction(1), other),))

    __radd__ = __add__

    def __mul__(self, q):
        q = as_fraction(q)
        return SurdSum((c * q, m) for c, m in self._terms)

    __rmul__ = __mul__

    def simplify(self):
        """A single Magnitude when the sum collapses to one radical, else self."""
        groups = _group_terms(self.terms())
        if not groups:
            return Magnitude(0)
        if len(groups) == 1:
            (k, r), c = next(iter(groups.items()))
            if c > 0:
                return Magnitude.from_square(c * c * r, k)
        return self

    def __eq__(self, other):
        other = _coerce_any(other)
        if other is NotImplemented:
            return NotImplemented
        return compare(self, other) == Ordering.EQUAL

    def __hash__(self):
        return hash(tuple(sorted(_group_terms(self.terms()).items())))

    def __lt__(self, other):
        other = _coerce_any(other)
        if other is NotImplemented:
            return NotImplemented
        return compare(self, other) == Ordering.LESS

    def to_float(self) -> float:
        return sum(float(c) * m.to_float() for c, m in self._terms)

    def __str__(self):
        if not self._terms:
            return "0"
        return " + ".join(str(m) if c == 1 else f"{c}*{m}" for c, m in self._terms)

    def __repr__(self):
        return f"SurdSum({self})"


# ---------------------------------------------------------------------------
# exact sign determination


def _atan_inv_bounds(x: int, bits: int):
    """Rational enclosure of atan(1/x), width below 2**-bits."""
    eps = Fraction(1, 2 ** bits)
    total = Fraction(0)
    k = 0
    while True:
        t = Fraction(1, (2 * k + 1) * x ** (2 * k + 1))
        if t < eps:
            # alternating series with decreasing terms: the next term brackets
            return (total - t, total) if k % 2 else (total, total + t)
        total += t if k % 2 == 0 else -t
        k += 1


@lru_cache(maxsize=64)
def pi_bounds(bits: int):
    """Rational lower and upper bounds for pi, via Machin's formula."""
    lo5, hi5 = _atan_inv_bounds(5, bits + 6)
    lo239, hi239 = _atan_inv_bounds(239, bits + 6)
    return 16 * lo5 - 4 * hi239, 16 * hi5 - 4 * lo239


def _sqrt_bounds(r: Fraction, bits: int):
    a, d = r.numerator, r.denominator
    s = math.isqrt(a * d * 4 ** bits)
    scale = d * 2 ** bits
    return Fraction(s, scale), Fraction(s + 1, scale)


def _group_terms(terms):
    """Merge c*sqrt(r)*pi^k terms whose radicands differ by a rational square."""
    groups: dict = {}
    for c, r, k in terms:
        if c == 0 or r == 0:
            continue
        for (k0, r0) in list(groups):
            if k0 == k and is_square(r / r0):
                groups[(k0, r0)] += c * _exact_sqrt(r / r0)
                break
        else:
            groups[(k, r)] = c
    return {key: c for key, c in groups.items() if c != 0}


def _sign(terms) -> int:
    groups = _group_terms(terms)
    if not groups:
        return 0
    # Distinct groups are Q-independent, so the sum is nonzero and refinement terminates.
    bits = 40
    while True:
        lo_sum = hi_sum = Fraction(0)
        pi_lo, pi_hi = pi_bounds(bits)
        for (k, r), c in groups.items():
            s_lo, s_hi = _sqrt_bounds(r, bits) if r != 1 else (Fraction(1), Fraction(1))
            lo, hi = s_lo * pi_lo ** k, s_hi * pi_hi ** k
            if c > 0:
                lo_sum += c * lo
                hi_sum += c * hi
            else:
                lo_sum += c * hi
                hi_sum += c * lo
        if lo_sum > 0:
            return 1
        if hi_sum < 0:
            return -1
        bits *= 2
        if bits > 1 << 16:
            raise SadicError("sign refinement did not terminate")


def compare(a, b) -> Ordering:
    """Exact three-way comparison of Magnitudes, SurdSums and rationals."""
    a, b = _coerce_any(a), _coerce_any(b)
    if isinstance(a, Magnitude) and isinstance(b, Magnitude):
        if a.pi_exp == b.pi_exp:
            # both sides nonnegative: squaring preserves the order
            return Ordering((a.sq > b.sq) - (a.sq < b.sq))
    diff = a.terms() + [(-c, r, k) for c, r, k in b.terms()]
    return Ordering(_sign(diff))


def mag_max(values: Iterable) -> Magnitude:
    best = Magnitude(0)
    for v in values:
        v = Magnitude.of(v)
        if compare(v, best) == Ordering.GREATER:
            best = v
    return best


def abs_at(x: RationalLike, place: Place) -> Magnitude:
    """Normalised absolute value |x|_v."""
    x = as_fraction(x)
    if x == 0:
        return Magnitude(0)
    if place.is_infinite:
        return Magnitude(abs(x))
    return Magnitude(p_power(place.p, -valuation(x, place.p)))
