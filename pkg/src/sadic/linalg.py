"""Vectors and matrices over K_S with rational entries at every place.

Row-vector convention throughout: a matrix acts on the right, ``xi g``.
Norms are Euclidean at the real place and sup norms at the p-adic places;
the norm of an S-adic vector is the maximum over places and its content the
product.  Balls are open, which is what makes the unit p-adic ball have
volume 1/p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import _matrix as mx
from .errors import RankDeficiencyError, SingularMatrixError
from .exactnum import (
    INF,
    Magnitude,
    Ordering,
    Place,
    SConfig,
    abs_at,
    as_fraction,
    check_field,
    compare,
    mag_max,
    valuation,
)

__all__ = [
    "ArchGramSchmidt",
    "Radius",
    "SMatrix",
    "SVector",
    "VolumeValue",
    "ball_volume",
    "content",
    "gram_schmidt_arch",
    "gram_schmidt_nonarch",
    "norm",
    "place_norm",
    "uniform_exponent",
]


def _as_place(key) -> Place:
    if isinstance(key, Place):
        return key
    if key in ("inf", None):
        return INF
    return Place(int(key))


@dataclass(frozen=True)
class SVector:
    """Element of K_S^n: one rational vector per place of ``config``."""

    config: SConfig
    per_place: Mapping

    def __post_init__(self):
        entries = {_as_place(k): mx.vec(v) for k, v in dict(self.per_place).items()}
        places = set(self.config.places)
        if set(entries) != places:
            raise ValueError(f"need exactly the places {sorted(map(str, places))}, got {sorted(map(str, entries))}")
        lengths = {len(v) for v in entries.values()}
        if len(lengths) != 1 or 0 in lengths:
            raise ValueError("all place components must have the same positive length")
        ordered = {pl: entries[pl] for pl in self.config.places}
        object.__setattr__(self, "per_place", ordered)

    @classmethod
    def diagonal(cls, config: SConfig, xs) -> "SVector":
        """The image of a rational vector under the diagonal embedding Q^n -> K_S^n."""
        v = mx.vec(xs)
        return cls(config, {pl: v for pl in config.places})

    @property
    def n(self) -> int:
        return len(next(iter(self.per_place.values())))

    def __getitem__(self, place):
        return self.per_place[_as_place(place)]

    def __add__(self, other: "SVector") -> "SVector":
        return SVector(self.config, {pl: mx.add(self[pl], other[pl]) for pl in self.config.places})

    def __sub__(self, other: "SVector") -> "SVector":
        return SVector(self.config, {pl: mx.sub(self[pl], other[pl]) for pl in self.config.places})

    def scale(self, c) -> "SVector":
        """Multiply by a scalar: a rational (diagonally embedded) or a per-place mapping."""
        if isinstance(c, Mapping):
            cs = {_as_place(k): as_fraction(v) for k, v in c.items()}
        else:
            cs = {pl: as_fraction(c) for pl in self.config.places}
        return SVector(self.config, {pl: mx.scale(cs[pl], self[pl]) for pl in self.config.places})

    def __matmul__(self, g: "SMatrix") -> "SVector":
        return SVector(self.config, {pl: mx.vecmat(self[pl], g[pl]) for pl in self.config.places})

    def is_zero(self) -> bool:
        return all(x == 0 for v in self.per_place.values() for x in v)


@dataclass(frozen=True)
class SMatrix:
    """Element of M_n(K_S): one square rational matrix per place."""

    config: SConfig
    per_place: Mapping

    def __post_init__(self):
        entries = {_as_place(k): mx.mat(v) for k, v in dict(self.per_place).items()}
        if set(entries) != set(self.config.places):
            raise ValueError("matrix must have exactly one entry per place")
        sizes = {(len(a), len(a[0]) if a else 0) for a in entries.values()}
        if len(sizes) != 1:
            raise ValueError("all place matrices must have the same shape")
        (r, c), = sizes
        if r != c or r == 0:
            raise ValueError("matrices must be square and nonempty")
        object.__setattr__(self, "per_place", {pl: entries[pl] for pl in self.config.places})
        object.__setattr__(self, "_dets", {pl: mx.det(a) for pl, a in entries.items()})

    @classmethod
    def diagonal(cls, config: SConfig, rows) -> "SMatrix":
        a = mx.mat(rows)
        return cls(config, {pl: a for pl in config.places})

    @classmethod
    def identity(cls, config: SConfig, n: int) -> "SMatrix":
        return cls.diagonal(config, mx.identity(n))

    @property
    def n(self) -> int:
        return len(next(iter(self.per_place.values())))

    def __getitem__(self, place):
        return self.per_place[_as_place(place)]

    def det(self, place) -> Fraction:
        return self._dets[_as_place(place)]

    def invertible(self, place=None) -> bool:
        if place is None:
            return all(d != 0 for d in self._dets.values())
        return self.det(place) != 0

    def inverse(self) -> "SMatrix":
        if not self.invertible():
            raise SingularMatrixError("matrix is singular at some place")
        return SMatrix(self.config, {pl: mx.inverse(a) for pl, a in self.per_place.items()})

    def __matmul__(self, other: "SMatrix") -> "SMatrix":
        return SMatrix(self.config, {pl: mx.matmul(self[pl], other[pl]) for pl in self.config.places})

    def row(self, i: int) -> SVector:
        return SVector(self.config, {pl: a[i] for pl, a in self.per_place.items()})


def place_norm(x: Sequence, place: Place) -> Magnitude:
    """||x||_v: Euclidean at infinity, sup of |x_i|_p otherwise."""
    if place.is_infinite:
        return Magnitude.from_square(sum((Fraction(t) * t for t in x), Fraction(0)))
    return mag_max(abs_at(t, place) for t in x)


def norm(xi: SVector) -> Magnitude:
    return mag_max(place_norm(xi[pl], pl) for pl in xi.config.places)


def content(xi: SVector) -> Magnitude:
    out = Magnitude(1)
    for pl in xi.config.places:
        out = out * place_norm(xi[pl], pl)
    return out


# ---------------------------------------------------------------------------
# radii and volumes


def uniform_exponent(p: int, r) -> int:
    """Smallest integer e with p**-e < r, so the open p-adic r-ball is p^e Z_p^n."""
    r = Magnitude.of(r)
    if r.is_zero:
        raise ValueError("radius must be positive")
    # start from a float estimate, then settle exactly
    e = -math.floor(math.log(max(r.to_float(), 1e-300), p))
    while compare(Magnitude(Fraction(p) ** -(e - 1)), r) == Ordering.LESS:
        e -= 1
    while compare(Magnitude(Fraction(p) ** -e), r) != Ordering.LESS:
        e += 1
    return e


@dataclass(frozen=True)
class Radius:
    """Per-place radius: real ball ``||xi_inf|| < arch`` and p-adic balls ``p^{e_p} Z_p^n``."""

    arch: Fraction
    nonarch: Mapping = field(default_factory=dict)

    def __post_init__(self):
        a = as_fraction(self.arch)
        if a <= 0:
            raise ValueError("archimedean radius must be positive")
        object.__setattr__(self, "arch", a)
        object.__setattr__(self, "nonarch", {int(p): int(e) for p, e in dict(self.nonarch).items()})

    @classmethod
    def uniform(cls, r, config: SConfig) -> "Radius":
        """The open ball of radius r in every place of S."""
        r = as_fraction(r)
        return cls(r, {p: uniform_exponent(p, r) for p in config.primes})

    def exponent(self, p: int) -> int:
        return self.nonarch[p]


@dataclass(frozen=True)
class VolumeValue:
    """The exact real number ``coeff * pi**pi_exp``."""

    coeff: Fraction
    pi_exp: int = 0

    def as_magnitude(self) -> Magnitude:
        return Magnitude(self.coeff, pi_exp=self.pi_exp)

    def to_float(self) -> float:
        return float(self.coeff) * math.pi ** self.pi_exp


def _unit_ball_coeff(n: int) -> Fraction:
    """Euclidean unit n-ball volume divided by pi^(n//2)."""
    k = n // 2
    if n % 2 == 0:
        return Fraction(1, math.factorial(k))
    double_fact = math.prod(range(1, n + 1, 2))
    return Fraction(2 ** (k + 1), double_fact)


def ball_volume(n: int, r: Radius, sigma: int = 1, tau: int = 0) -> VolumeValue:
    """Normalised Haar volume of the open ball B_r(K_S^n).

    The real factor is the Euclidean ball volume; each p-adic factor is
    vol(p^e Z_p^n) = p^(-n e) since Z_p^n has volume one.
    """
    check_field(sigma, tau)
    if n < 1:
        raise ValueError("dimension must be positive")
    coeff = r.arch ** n * _unit_ball_coeff(n)
    for p, e in r.nonarch.items():
        coeff *= Fraction(p) ** (-n * e)
    return VolumeValue(coeff, n // 2)


# ---------------------------------------------------------------------------
# Gram-Schmidt


def gram_schmidt_nonarch(vectors: Sequence[Sequence], p: int):
    """Ultrametric orthonormalisation over Q_p.

    Returns ``(etas, pivots)``.  Each eta_j has sup norm one, entry 1 at
    column ``pivots[j]`` and entry 0 at every earlier pivot, and the first r
    etas span the same space as the first r inputs.  Consequently
    ``||sum a_i eta_i||_p = max |a_i|_p`` for all coefficients.  Pivots are
    0-based; ties in absolute value go to the lowest column.
    """
    etas, pivots = [], []
    for idx, xi in enumerate(vectors):
        y = mx.vec(xi)
        for eta, piv in zip(etas, pivots):
            c = y[piv]
            if c:
                y = mx.sub(y, mx.scale(c, eta))
        best, best_val = None, None
        for j, t in enumerate(y):
            if t == 0:
                continue
            v = valuation(t, p)
            if best_val is None or v < best_val:
                best, best_val = j, v
        if best is None:
            raise RankDeficiencyError(idx)
        etas.append(mx.scale(1 / y[best], y))
        pivots.append(best)
    return etas, pivots


@dataclass(frozen=True)
class ArchGramSchmidt:
    """Exact classical orthogonalisation.

    ``orthogonal[i]`` are the (unnormalised) Gram-Schmidt vectors,
    ``sq_lengths[i]`` their squared Euclidean lengths and ``mu[i][j]`` the
    coefficients with ``v_i = orthogonal_i + sum_{j<i} mu_ij orthogonal_j``.
    Unit vectors are ``orthogonal_i / sqrt(sq_lengths_i)``; the length is
    available exactly as :meth:`length`.
    """

    orthogonal: tuple
    sq_lengths: tuple
    mu: tuple

    def length(self, i: int) -> Magnitude:
        return Magnitude.from_square(self.sq_lengths[i])


def gram_schmidt_arch(vectors: Sequence[Sequence]) -> ArchGramSchmidt:
    orth, sq, mu = [], [], []
    for idx, v in enumerate(vectors):
        v = mx.vec(v)
        w = v
        row = []
        for u, s in zip(orth, sq):
            c = mx.dot(v, u) / s
            row.append(c)
            w = mx.sub(w, mx.scale(c, u))
        s = mx.dot(w, w)
        if s == 0:
            raise RankDeficiencyError(idx)
        orth.append(w)
        sq.append(s)
        mu.append(tuple(row))
    return ArchGramSchmidt(tuple(orth), tuple(sq), tuple(mu))
