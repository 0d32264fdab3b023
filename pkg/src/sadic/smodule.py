"""Discrete I_S-modules in K_S^n.

A full-rank module is I_S^n g for g in GL_n(K_S).  Its points are the
vectors a g with a in Z[1/M]^n, so questions about the module become
questions about the coefficient vector a: the p-adic ball conditions cut out
an ordinary lattice of a's (see :func:`zlattice.intersect_local_conditions`)
and the real condition is a positive definite quadratic form on it.

The real component may be given either as a matrix g_inf or only through its
Gram matrix G = g_inf g_inf^T.  The second form is what reduction produces,
since the reduced real matrix generally has irrational entries while G stays
rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import _matrix as mx
from .errors import (
    IterationLimitError,
    RankDeficiencyError,
    SingularMatrixError,
    ZeroContentError,
)
from .exactnum import INF, Magnitude, Ordering, Place, SConfig, abs_at, as_fraction, compare, mag_max, valuation
from .linalg import (
    Radius,
    SMatrix,
    SVector,
    content,
    gram_schmidt_arch,
    gram_schmidt_nonarch,
    place_norm,
    uniform_exponent,
)
from .zlattice import (
    IntegerLattice,
    _cvp,
    _enumerate,
    complete_basis,
    hnf,
    intersect_local_conditions,
    saturate,
)

__all__ = [
    "BalanceReport",
    "MinimaResult",
    "ModulePoint",
    "Reduction",
    "SModule",
    "balance",
    "covolume",
    "first_minimum",
    "points_in_ball",
    "rank_check",
    "reduce",
    "relative_covolume",
    "successive_minima",
]

# cov(I_S^n) for K = Q: [0,1)^n x prod_p Z_p^n is a fundamental domain
# (strong approximation), and it has volume 1 for the normalised measure.
COV_IS = Fraction(1)

DEFAULT_ITERATION_CAP = 400


@dataclass(frozen=True)
class ModulePoint:
    """A point a g of a module, remembered by its coefficient vector a.

    ``value`` is None for modules whose real part is known only through a
    Gram matrix; ``arch_sq`` is always the exact squared real norm.
    """

    coeffs: tuple
    norm: Magnitude
    arch_sq: Fraction
    value: Optional[SVector] = None

    def to_dict(self) -> dict:
        out = {"coeffs": [str(c) for c in self.coeffs], "norm": _mag_dict(self.norm)}
        if self.value is not None:
            out["value"] = {str(pl): [str(x) for x in v] for pl, v in self.value.per_place.items()}
        return out


def _mag_dict(m: Magnitude) -> dict:
    d = {"value": str(m.value), "sqrt": m.sqrt}
    if m.pi_exp:
        d["pi_exp"] = m.pi_exp
    return d


class SModule:
    """A discrete I_S-module.

    Build full-rank modules with ``SModule(config, g)`` or
    :meth:`from_gram`, and general ones with :meth:`generated`.  The
    general kind only supports rank and relative covolume.
    """

    def __init__(self, config: SConfig, g: SMatrix):
        if g.config != config:
            raise ValueError("matrix and module use different place sets")
        if not g.invertible():
            raise SingularMatrixError("generator matrix is singular at some place")
        self.config = config
        self.kind = "full"
        self.n = g.n
        self.g = g
        self.nonarch = {p: g[p] for p in config.primes}
        self.gram = mx.gram(g[INF])
        self._det_gram = mx.det(self.gram)
        self.generators = None

    @classmethod
    def from_gram(cls, config: SConfig, gram, nonarch) -> "SModule":
        """Full-rank module with real part given by a positive definite Gram matrix."""
        self = cls.__new__(cls)
        self.config = config
        self.kind = "full"
        self.gram = mx.mat(gram)
        self.n = len(self.gram)
        self.g = None
        self.nonarch = {int(p): mx.mat(m) for p, m in dict(nonarch).items()}
        if set(self.nonarch) != set(config.primes):
            raise ValueError("need one matrix per prime of S")
        if any(mx.det(m) == 0 for m in self.nonarch.values()):
            raise SingularMatrixError("generator matrix is singular at some place")
        self._det_gram = mx.det(self.gram)
        if self._det_gram <= 0:
            raise SingularMatrixError("Gram matrix is not positive definite")
        self.generators = None
        return self

    @classmethod
    def standard(cls, config: SConfig, n: int) -> "SModule":
        """I_S^n itself."""
        return cls(config, SMatrix.identity(config, n))

    @classmethod
    def generated(cls, config: SConfig, generators: Sequence[SVector]) -> "SModule":
        """The module spanned by K_S-independent vectors (general kind)."""
        gens = list(generators)
        if not gens:
            raise ValueError("need at least one generator")
        n = gens[0].n
        if any(v.n != n or v.config != config for v in gens):
            raise ValueError("generators must share the dimension and place set")
        for pl in config.places:
            keep = mx.echelon_pivots([v[pl] for v in gens])
            if len(keep) != len(gens):
                idx = next(i for i in range(len(gens)) if i not in keep)
                raise RankDeficiencyError(idx, f"generator {idx} is dependent at {pl}")
        self = cls.__new__(cls)
        self.config = config
        self.kind = "general"
        self.n = n
        self.g = None
        self.nonarch = None
        self.gram = None
        self.generators = tuple(gens)
        return self

    def _require_full(self):
        if self.kind != "full":
            raise ValueError("operation needs a full-rank module")

    @property
    def rank(self) -> int:
        return self.n if self.kind == "full" else len(self.generators)

    def arch_sq(self, a) -> Fraction:
        return mx.qform(a, self.gram)

    def point(self, a) -> ModulePoint:
        """The module point with coefficient vector a."""
        self._require_full()
        a = mx.vec(a)
        q = self.arch_sq(a)
        norms = [Magnitude.from_square(q)]
        norms += [place_norm(mx.vecmat(a, m), Place(p)) for p, m in self.nonarch.items()]
        value = SVector.diagonal(self.config, a) @ self.g if self.g is not None else None
        return ModulePoint(a, mag_max(norms), q, value)

    def abs_det(self, place) -> Magnitude:
        """|det g_v|_v."""
        self._require_full()
        place = place if isinstance(place, Place) else (INF if place in ("inf", None) else Place(int(place)))
        if place.is_infinite:
            return Magnitude.from_square(self._det_gram)
        return abs_at(mx.det(self.nonarch[place.p]), place)

    def __repr__(self):
        if self.kind == "general":
            return f"SModule(general, S={self.config.places}, rank={self.rank}, n={self.n})"
        return f"SModule(primes={list(self.config.primes)}, n={self.n})"


def covolume(module: SModule) -> Magnitude:
    """cont(det g) times cov(I_S^n) (which is 1)."""
    module._require_full()
    out = Magnitude(COV_IS)
    for pl in module.config.places:
        out = out * module.abs_det(pl)
    return out


# ---------------------------------------------------------------------------
# relative covolume and ranks


def _p_factor(rows, p: int) -> Magnitude:
    """|det T|_p where rows = T E and E is a Z_p-basis of span(rows) cap Z_p^n."""
    e = saturate(rows)
    ef = tuple(tuple(Fraction(x) for x in r) for r in e)
    m = len(rows)
    # solve rows = T E using pivot columns of E
    cols = _independent_columns(ef)
    sub_e = tuple(tuple(r[j] for j in cols) for r in ef)
    sub_r = tuple(tuple(r[j] for j in cols) for r in rows)
    t = mx.matmul(sub_r, mx.inverse(sub_e))
    if mx.matmul(t, ef) != tuple(rows):
        raise AssertionError("rows are not in the span of their saturation")
    assert len(t) == m
    return abs_at(mx.det(t), Place(p))


def _independent_columns(rows):
    return mx.echelon_pivots(mx.transpose(rows))


def relative_covolume(generators: Sequence[SVector]) -> Magnitude:
    """Covolume of the module spanned by ``generators`` inside its own K_S-span.

    At infinity this is the m-volume sqrt(det(A A^T)) of the real
    components; at p it is |det T|_p, where the p-components equal T times a
    Z_p-basis of the saturated lattice.
    """
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    config = gens[0].config
    for pl in config.places:
        if mx.rank([v[pl] for v in gens]) != len(gens):
            raise RankDeficiencyError(next(i for i in range(len(gens))
                                           if i not in mx.echelon_pivots([v[pl] for v in gens])))
    rows = [v[INF] for v in gens]
    out = Magnitude.from_square(mx.det(mx.gram(rows)))
    for p in config.primes:
        out = out * _p_factor(tuple(v[p] for v in gens), p)
    return out * COV_IS


def rank_check(module: SModule, coeffs: Sequence[Sequence]) -> int:
    """Rank over Q of coefficient vectors a_i in I_S^n, checked against every place.

    The ranks of the value vectors a_i g_v agree at every place, as they must
    for a discrete module.
    """
    module._require_full()
    rows = [mx.vec(a) for a in coeffs]
    if any(len(a) != module.n for a in rows):
        raise ValueError("coefficient vectors have the wrong length")
    r = mx.rank(rows)
    for p, m in module.nonarch.items():
        if mx.rank([mx.vecmat(a, m) for a in rows]) != r:
            raise AssertionError(f"rank mismatch at {p}")
    # at infinity the rank of the values equals the rank of their Gram matrix
    if rows and mx.rank(mx.matmul(mx.matmul(rows, module.gram), mx.transpose(rows))) != r:
        raise AssertionError("rank mismatch at inf")
    return r


# ---------------------------------------------------------------------------
# enumeration


def _constraint_lattice(module: SModule, exps: dict) -> IntegerLattice:
    conds = [(p, exps[p], m) for p, m in module.nonarch.items()]
    return intersect_local_conditions(module.n, conds, module.config.primes)


def _canonical(points):
    return sorted(points, key=_point_key)


def _point_key(pt: ModulePoint):
    return (_MagKey(pt.norm), pt.coeffs)


class _MagKey:
    __slots__ = ("m",)

    def __init__(self, m):
        self.m = m

    def __lt__(self, other):
        return compare(self.m, other.m) == Ordering.LESS

    def __eq__(self, other):
        return self.m == other.m


def points_in_ball(module: SModule, r: Radius) -> list:
    """All nonzero module points xi with xi_inf in the open ball of radius r.arch
    and ||xi_p||_p <= p^{-e_p}; canonical order (norm, then coefficients)."""
    module._require_full()
    missing = set(module.config.primes) - set(r.nonarch)
    if missing:
        raise ValueError(f"radius has no exponent for {sorted(missing)}")
    lat = _constraint_lattice(module, r.nonarch)
    pts = [module.point(a) for a, _ in _enumerate(lat.basis, module.gram, r.arch * r.arch)]
    return _canonical(pts)


def points_below(module: SModule, radius) -> list:
    """Nonzero points with ||xi|| < radius (uniform open ball, radius any Magnitude)."""
    module._require_full()
    radius = Magnitude.of(radius)
    exps = {p: uniform_exponent(p, radius) for p in module.config.primes}
    lat = _constraint_lattice(module, exps)
    pts = [module.point(a) for a, _ in _enumerate(lat.basis, module.gram, radius.sq)]
    return _canonical(pts)


# ---------------------------------------------------------------------------
# successive minima


@dataclass(frozen=True)
class MinimaResult:
    minima: tuple
    witnesses: tuple

    def to_dict(self) -> dict:
        return {"minima": [_mag_dict(m) for m in self.minima],
                "witnesses": [w.to_dict() for w in self.witnesses]}


def _lower_bound(module: SModule) -> Fraction:
    """A rational r0 <= ||xi|| for every nonzero point xi.

    For nonzero a in I_S^n some place has ||a||_v >= 1 (product formula on a
    nonzero coordinate), and ||a||_v <= c_v ||a g_v||_v with c_v a bound for
    the operator norm of g_v^{-1}.
    """
    c2 = sum((mx.inverse(module.gram)[i][i] for i in range(module.n)), Fraction(0))
    c = math.isqrt(math.ceil(c2)) + 1
    for p, m in module.nonarch.items():
        inv = mx.inverse(m)
        c = max(c, max(abs_at(x, Place(p)).rational() for row in inv for x in row))
    return Fraction(1) / c


def _normalise_sign(a):
    first = next((x for x in a if x != 0), 0)
    return a if first > 0 else tuple(-x for x in a)


def _search_outside(module: SModule, span_rows, radius: Magnitude):
    """Some point outside span_Q(span_rows) of norm < radius: the best one found, or None.

    With W = Lambda_r cap V completed to a basis (W; C) of the constraint
    lattice Lambda_r, a point w + z C lies outside V iff z != 0; we enumerate
    z under the orthogonal-complement form and solve an exact CVP in W for
    each z.
    """
    n = module.n
    exps = {p: uniform_exponent(p, radius) for p in module.config.primes}
    lat = _constraint_lattice(module, exps)
    b0 = lat.basis
    bound = radius.sq
    g = module.gram
    if span_rows:
        coords = [mx.solve_left(b0, v) for v in span_rows]
        s = saturate(coords)
        u = complete_basis(s, n)
        uf = tuple(tuple(Fraction(x) for x in r) for r in u)
        basis = mx.matmul(uf, b0)
        k = len(s)
    else:
        basis, k = b0, 0
    w, c = basis[:k], basis[k:]
    a = mx.matmul(mx.matmul(basis, g), mx.transpose(basis))
    if k:
        aww = tuple(r[:k] for r in a[:k])
        awc = tuple(r[k:] for r in a[:k])
        acc = tuple(r[k:] for r in a[k:])
        perp = mx.sub_mat(acc, mx.matmul(mx.matmul(mx.transpose(awc), mx.inverse(aww)), awc))
    else:
        perp = a
    ident = mx.identity(n - k)
    best = None
    for z, _ in _enumerate(ident, perp, bound):
        t = mx.vecmat(z, c)
        if k:
            p, _ = _cvp(w, g, tuple(-x for x in t), n)
            pt = mx.add(t, p)
        else:
            pt = t
        q = mx.qform(pt, g)
        # the real part alone already loses to the best candidate
        if q >= bound or (best is not None and compare(Magnitude.from_square(q), best.norm) == Ordering.GREATER):
            continue
        cand = module.point(_normalise_sign(pt))
        if compare(cand.norm, radius) != Ordering.LESS:
            continue
        if best is None or _point_key(cand) < _point_key(best):
            best = cand
    return best


def _next_minimum(module: SModule, span_rows, start: Magnitude, budget: list) -> ModulePoint:
    # nothing outside the span is shorter than start, so the open start-ball
    # need not be searched; lo is the largest radius known to be empty
    lo, r = start, start * 2
    found = None
    while found is None:
        budget[0] -= 1
        if budget[0] < 0:
            raise IterationLimitError("radius doubling exceeded the iteration cap")
        found = _search_outside(module, span_rows, r)
        if found is None:
            lo, r = r, r * 2
    if found.norm == lo:
        return found
    # descend until nothing shorter is left
    while True:
        budget[0] -= 1
        if budget[0] < 0:
            raise IterationLimitError("descent exceeded the iteration cap")
        nxt = _search_outside(module, span_rows, found.norm)
        if nxt is None:
            return found
        found = nxt


def successive_minima(module: SModule, iteration_cap: int = DEFAULT_ITERATION_CAP) -> MinimaResult:
    """Exact minima iota_1 <= ... <= iota_n and independent witnesses.

    iota_m is the least norm of a point outside the span of the first m-1
    witnesses (the greedy choice is optimal for this matroid), searched by
    radius doubling followed by descent.
    """
    module._require_full()
    budget = [iteration_cap]
    minima, wits = [], []
    start = Magnitude(_lower_bound(module))
    for _ in range(module.n):
        pt = _next_minimum(module, [w.coeffs for w in wits], start, budget)
        minima.append(pt.norm)
        wits.append(pt)
        start = pt.norm
    return MinimaResult(tuple(minima), tuple(wits))


def first_minimum(module: SModule, iteration_cap: int = DEFAULT_ITERATION_CAP) -> ModulePoint:
    """A shortest nonzero point."""
    module._require_full()
    return _next_minimum(module, [], Magnitude(_lower_bound(module)), [iteration_cap])


# ---------------------------------------------------------------------------
# reduction


@dataclass(frozen=True)
class Reduction:
    """Result of rescaling a module along its minima witnesses.

    ``module`` is Gamma g'; ``nonarch`` holds g'_p and ``arch_gram`` the
    real Gram matrix of g'_inf; ``det_content`` is cont(det g') and
    ``witness_content`` the product of cont(gamma_i).
    """

    module: SModule
    nonarch: dict
    arch_gram: tuple
    det_content: Magnitude
    witness_content: Magnitude


def reduce(module: SModule, minima: Optional[MinimaResult] = None) -> Reduction:
    """g' with cont(det g') = prod cont(gamma_i)^-1 such that Gamma g' has no nonzero
    point of norm < 1.

    Each witness gamma_i is shrunk by ||gamma_{i,v}|| along the i-th vector of
    a Gram-Schmidt frame at every place.  At infinity that frame is only
    orthogonal, so g'_inf is carried through its Gram matrix, which is
    rational.
    """
    module._require_full()
    if minima is None:
        minima = successive_minima(module)
    n = module.n
    coeffs = [w.coeffs for w in minima.witnesses]
    new_nonarch, gprime = {}, {}
    wcontent = Magnitude(1)
    for w in minima.witnesses:
        wcontent = wcontent * Magnitude.from_square(w.arch_sq)
    for p, m in module.nonarch.items():
        vals = [mx.vecmat(a, m) for a in coeffs]
        etas, _ = gram_schmidt_nonarch(vals, p)
        h = tuple(etas)
        scales = []
        for v in vals:
            nv = place_norm(v, Place(p)).rational()
            wcontent = wcontent * nv
            scales.append(nv)  # 1/b with |b|_p = ||gamma_{i,p}||_p, b a power of p
        gp = mx.matmul(mx.matmul(mx.inverse(h), mx.diag(scales)), h)
        gprime[p] = gp
        new_nonarch[p] = mx.matmul(m, gp)
    # real place: with orthogonal rows h*_i and b_i = ||gamma_{i,inf}||,
    # g'_inf g'_inf^T = sum_i h*_i^T h*_i / (s_i b_i^2); the module needs it
    # pulled back to coefficients, i.e. g_inf (g' g'^T) g_inf^T.
    bsq = [w.arch_sq for w in minima.witnesses]
    new_gram = _reduce_gram(module.gram, coeffs, bsq)
    arch_gram = None
    if module.g is not None:
        gs = gram_schmidt_arch([mx.vecmat(a, module.g[INF]) for a in coeffs])
        d = mx.diag([1 / (s * b) for s, b in zip(gs.sq_lengths, bsq)])
        arch_gram = mx.matmul(mx.matmul(mx.transpose(gs.orthogonal), d), gs.orthogonal)
    red = SModule.from_gram(module.config, new_gram, new_nonarch)
    # cont(det g') from the matrices themselves
    detc = Magnitude.from_square(red._det_gram / module._det_gram)
    for p, gp in gprime.items():
        detc = detc * abs_at(mx.det(gp), Place(p))
    return Reduction(red, gprime, arch_gram, detc, wcontent)


def _reduce_gram(gram, coeffs, bsq):
    """Coefficient Gram matrix of Gamma g' at the real place.

    Gram-Schmidt is run on the coefficient vectors with the inner product G,
    which is the same as running it on their values, so only G is needed;
    the result is sum_i (h_i G)^T (h_i G) / (s_i b_i^2).
    """
    n = len(gram)
    orth, sq = [], []
    for a in coeffs:
        w = mx.vec(a)
        for u, s in zip(orth, sq):
            w = mx.sub(w, mx.scale(mx.dot(mx.vecmat(a, gram), u) / s, u))
        orth.append(w)
        sq.append(mx.qform(w, gram))
    cols = [mx.vecmat(h, gram) for h in orth]  # G h^T as a row (G symmetric)
    new = [[Fraction(0)] * n for _ in range(n)]
    for c, s, b in zip(cols, sq, bsq):
        f = 1 / (s * b)
        for i in range(n):
            for j in range(n):
                new[i][j] += f * c[i] * c[j]
    return mx.mat(new)


# ---------------------------------------------------------------------------
# balancing by S-units


@dataclass(frozen=True)
class BalanceReport:
    unit: Fraction
    exponents: dict
    content: Magnitude
    norm_before: Magnitude
    norm_after: Magnitude
    constant: Fraction
    within_bound: bool

    def to_dict(self) -> dict:
        return {"unit": str(self.unit), "exponents": {str(p): e for p, e in self.exponents.items()},
                "content": _mag_dict(self.content), "norm_before": _mag_dict(self.norm_before),
                "norm_after": _mag_dict(self.norm_after), "constant": str(self.constant),
                "within_bound": self.within_bound}


def balance_constant(config: SConfig) -> Fraction:
    """C_S with ||u xi||^|S| <= C_S cont(xi) for the optimal S-unit u.

    Setting every place term to at most t = cont^{1/|S|} M^{1/|S|} is always
    possible (each p-adic term can be put in (t/p, t], which forces the real
    term below t), so C_S = M works.
    """
    return Fraction(config.M)


def _p_exponent_for(p: int, b: Fraction, t: Magnitude) -> int:
    """Smallest e with b p^-e <= t."""
    e = -math.floor(math.log(max(t.to_float(), 1e-300) / float(b), p)) - 1
    while compare(Magnitude(b * Fraction(p) ** (-(e - 1))), t) != Ordering.GREATER:
        e -= 1
    while compare(Magnitude(b * Fraction(p) ** (-e)), t) == Ordering.GREATER:
        e += 1
    return e


def balance(xi: SVector):
    """The S-unit u = prod p^e_p (u > 0) minimising ||u xi||, with a report.

    Multiplying by p^e scales the real norm by p^e and the p-adic norm by
    p^-e, so the objective is max(b_inf prod p^e_p, max_p b_p p^-e_p).  Any
    feasible level U bounds the search box: each p-term must be <= U, which
    bounds e_p below, and the real term must be <= U, which bounds the sum
    of the e_p above.
    """
    config = xi.config
    cont = content(xi)
    if cont.is_zero:
        raise ZeroContentError("content is zero")
    b_inf = place_norm(xi[INF], INF)
    bp = {p: place_norm(xi[p], Place(p)).rational() for p in config.primes}
    before = mag_max([b_inf] + [Magnitude(v) for v in bp.values()])
    primes = list(config.primes)

    def value(es):
        real = b_inf * Magnitude(math.prod(Fraction(p) ** e for p, e in zip(primes, es)))
        return mag_max([real] + [Magnitude(bp[p] * Fraction(p) ** -e) for p, e in zip(primes, es)])

    if not primes:
        u, es, after = Fraction(1), (), before
    else:
        # heuristic feasible level from the balanced fundamental domain
        level = cont.to_float() ** (1 / config.size)
        start = tuple(_p_exponent_for(p, bp[p], Magnitude(Fraction(level).limit_denominator(10**12))) for p in primes)
        upper = value(start)
        lows = [_p_exponent_for(p, bp[p], upper) for p in primes]
        # real term b_inf prod p^e <= upper bounds each e_p given the others' lows
        highs = []
        for i, p in enumerate(primes):
            rest = math.prod(Fraction(q) ** lows[j] for j, q in enumerate(primes) if j != i)
            e = lows[i]
            while compare(b_inf * Magnitude(rest * Fraction(p) ** (e + 1)), upper) != Ordering.GREATER:
                e += 1
            highs.append(e)
        best = None
        for es in _box(lows, highs):
            v = value(es)
            if best is None or compare(v, best[0]) == Ordering.LESS or (v == best[0] and es < best[1]):
                best = (v, es)
        after, es = best
        u = math.prod(Fraction(p) ** e for p, e in zip(primes, es))
    c = balance_constant(config)
    ok = compare(after ** config.size, cont * c) != Ordering.GREATER
    rep = BalanceReport(Fraction(u), dict(zip(primes, es)), cont, before, after, c, ok)
    return Fraction(u), rep


def _box(lows, highs):
    if not lows:
        yield ()
        return
    for e in range(lows[0], highs[0] + 1):
        for rest in _box(lows[1:], highs[1:]):
            yield (e,) + rest
