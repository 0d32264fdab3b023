"""Checkers for the quantitative statements about S-adic modules.

Each checker computes both sides of an inequality exactly and returns a
:class:`BoundReport`; pass means lower <= middle <= upper under exact
comparison (a missing side is skipped).  General number fields are not
instantiated: the constants are written with sigma and tau, but only
sigma = 1, tau = 0 is accepted.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from . import _matrix as mx
from .errors import FalsificationError, PreconditionError, SpanOverlapError
from .exactnum import INF, Magnitude, Ordering, Place, SConfig, SurdSum, abs_at, as_fraction, check_field, compare, valuation
from .linalg import Radius, SMatrix, SVector, ball_volume, place_norm
from .smodule import (
    COV_IS,
    MinimaResult,
    ModulePoint,
    SModule,
    balance_constant,
    covolume,
    first_minimum,
    relative_covolume,
    successive_minima,
)
from .zlattice import IntegerLattice, _cvp, _enumerate, hnf, intersect_local_conditions, snf

__all__ = [
    "BoundReport",
    "CoveringBounds",
    "CoveringEstimate",
    "ProbeReport",
    "SBox",
    "certify_rk",
    "check_sum_covolume",
    "covering_radius_bounds",
    "covering_radius_estimate",
    "distance_to_module",
    "mahler_probe",
    "minkowski_box_point",
    "submodules_up_to",
    "verify_minkowski",
    "verify_precise",
]

R_K = Fraction(1)


@dataclass
class BoundReport:
    check: str
    instance: str
    lower: object
    middle: object
    upper: object
    passed: bool
    witnesses: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)


def _sandwich(lower, middle, upper) -> bool:
    ok = True
    if lower is not None:
        ok &= compare(lower, middle) != Ordering.GREATER
    if upper is not None:
        ok &= compare(middle, upper) != Ordering.GREATER
    return bool(ok)


def point_content(module: SModule, pt: ModulePoint) -> Magnitude:
    """cont(a g), computed place by place."""
    out = Magnitude.from_square(pt.arch_sq)
    for p, m in module.nonarch.items():
        out = out * place_norm(mx.vecmat(pt.coeffs, m), Place(p))
    return out


def _lower_constant(n: int, config: SConfig, sigma: int, tau: int) -> Magnitude:
    """2^{n sigma + n tau} pi^{n tau} / ((n!)^sigma ((2n)!)^tau) prod_p p^-n."""
    c = Fraction(2 ** (n * sigma + n * tau), math.factorial(n) ** sigma * math.factorial(2 * n) ** tau)
    for p in config.primes:
        c /= Fraction(p) ** n
    return Magnitude(c, pi_exp=n * tau)


def _unit_volume(n: int, config: SConfig, sigma: int, tau: int) -> Magnitude:
    return ball_volume(n, Radius.uniform(1, config), sigma, tau).as_magnitude()


def verify_precise(module: SModule, minima: Optional[MinimaResult] = None, instance: str = "",
                   sigma: int = 1, tau: int = 0) -> BoundReport:
    """cov * c_lower <= vol(B_1) prod cont(gamma_i) <= 2^{n sigma + 2 n tau} cov."""
    check_field(sigma, tau)
    if minima is None:
        minima = successive_minima(module)
    n, config = module.n, module.config
    cov = covolume(module)
    lower = cov / COV_IS * _lower_constant(n, config, sigma, tau)
    middle = _unit_volume(n, config, sigma, tau)
    for w in minima.witnesses:
        middle = middle * point_content(module, w)
    upper = cov * 2 ** (n * sigma + 2 * n * tau)
    return BoundReport("precise", instance, lower, middle, upper, _sandwich(lower, middle, upper),
                       list(minima.witnesses), {"cov": cov})


def verify_minkowski(module: SModule, minima: Optional[MinimaResult] = None, instance: str = "",
                     sigma: int = 1, tau: int = 0) -> BoundReport:
    """cov * c_lower <= vol(B_1) (iota_1...iota_n)^|S| <= C^n 2^{n sigma + 2 n tau} cov.

    C is the balancing constant: every witness satisfies
    cont(gamma_m) <= iota_m^|S| <= C cont(gamma_m), which is also checked
    and reported.
    """
    check_field(sigma, tau)
    if minima is None:
        minima = successive_minima(module)
    n, config = module.n, module.config
    size = config.size
    cov = covolume(module)
    c = balance_constant(config)
    lower = cov / COV_IS * _lower_constant(n, config, sigma, tau)
    prod = Magnitude(1)
    for m in minima.minima:
        prod = prod * m
    middle = _unit_volume(n, config, sigma, tau) * prod ** size
    upper = cov * (c ** n * 2 ** (n * sigma + 2 * n * tau))
    chain = True
    for iota, w in zip(minima.minima, minima.witnesses):
        cw = point_content(module, w)
        chain &= compare(cw, iota ** size) != Ordering.GREATER
        chain &= compare(iota ** size, cw * c) != Ordering.GREATER
    ok = _sandwich(lower, middle, upper) and chain
    return BoundReport("minkowski", instance, lower, middle, upper, ok, list(minima.witnesses),
                       {"C": c, "C^n*2^n": c ** n * 2 ** (n * sigma + 2 * n * tau), "content_chain": chain})


# ---------------------------------------------------------------------------
# Minkowski's box lemma


@dataclass(frozen=True)
class SBox:
    """Real box prod (-w_i, w_i) times p-adic subgroups p^{k_p} Z_p^n."""

    arch: tuple
    nonarch: Mapping = field(default_factory=dict)

    def __post_init__(self):
        ws = tuple(as_fraction(w) for w in self.arch)
        if not ws or any(w <= 0 for w in ws):
            raise ValueError("half-widths must be positive")
        object.__setattr__(self, "arch", ws)
        object.__setattr__(self, "nonarch", {int(p): int(k) for p, k in dict(self.nonarch).items()})

    def volume(self) -> Fraction:
        n = len(self.arch)
        v = math.prod((2 * w for w in self.arch), start=Fraction(1))
        for p, k in self.nonarch.items():
            v *= Fraction(p) ** (-n * k)
        return v

    def contains(self, module: SModule, a) -> bool:
        x = mx.vecmat(a, module.g[INF])
        if any(abs(t) >= w for t, w in zip(x, self.arch)):
            return False
        for p, k in self.nonarch.items():
            y = mx.vecmat(a, module.nonarch[p])
            if any(t != 0 and valuation(t, p) < k for t in y):
                return False
        return True


def minkowski_box_point(module: SModule, box: SBox, sigma: int = 1, tau: int = 0, instance: str = "") -> ModulePoint:
    """A nonzero module point in ``box``, which exists once vol(box) > 2^{n(sigma+2tau)} cov."""
    check_field(sigma, tau)
    if module.g is None:
        raise ValueError("box search needs the real generator matrix")
    n = module.n
    if len(box.arch) != n or set(box.nonarch) != set(module.config.primes):
        raise ValueError("box does not match the module")
    threshold = covolume(module) * 2 ** (n * (sigma + 2 * tau))
    if compare(Magnitude(box.volume()), threshold) != Ordering.GREATER:
        raise PreconditionError(f"box volume {box.volume()} does not exceed {threshold}")
    conds = [(p, box.nonarch[p], m) for p, m in module.nonarch.items()]
    lat = intersect_local_conditions(n, conds, module.config.primes)
    # the box sits inside the ellipsoid sum (x_i / w_i)^2 < n
    gi = module.g[INF]
    scaled = tuple(tuple(gi[r][c] / box.arch[c] for c in range(n)) for r in range(n))
    for a, _ in _enumerate(lat.basis, mx.gram(scaled), Fraction(n)):
        if box.contains(module, a):
            return module.point(a)
    rep = BoundReport("boxpoint", instance, None, Magnitude(box.volume()), threshold, False,
                      constants={"box": [str(w) for w in box.arch], "nonarch": dict(box.nonarch)})
    raise FalsificationError(rep, "no nonzero module point in a box above the volume threshold")


# ---------------------------------------------------------------------------
# covering radius


@dataclass(frozen=True)
class CoveringBounds:
    lower: Magnitude
    upper: object
    sharp_upper: object
    r_k: Fraction

    def __iter__(self):
        yield self.lower
        yield self.upper


def covering_radius_bounds(module: SModule, minima: Optional[MinimaResult] = None) -> CoveringBounds:
    """iota_n / max(4, p^2) <= s <= 2^{n-1} r_K (iota_1 + ... + iota_n).

    The sharp upper bound drops the 2^{n-1}, which the real triangle
    inequality allows for K = Q.
    """
    if minima is None:
        minima = successive_minima(module)
    n = module.n
    q = max([4] + [p * p for p in module.config.primes])
    lower = minima.minima[-1] / q
    total = SurdSum()
    for m in minima.minima:
        total = total + m
    sharp = (total * R_K).simplify()
    upper = (total * (R_K * 2 ** (n - 1))).simplify()
    return CoveringBounds(lower, upper, sharp, R_K)


def _padic_truncation(x: Fraction, p: int, N: int) -> Fraction:
    """c in Z[1/p] with v_p(x - c) >= N."""
    if x == 0:
        return Fraction(0)
    v = valuation(x, p)
    if v >= N:
        return Fraction(0)
    u = x / Fraction(p) ** v
    mod = p ** (N - v)
    r = (u.numerator * pow(u.denominator, -1, mod)) % mod
    return Fraction(r) * Fraction(p) ** v


def _crt_point(targets: Mapping[int, Sequence[Fraction]], precision: Mapping[int, int]) -> tuple:
    """a in Z[1/M]^n with v_p(a_i - x_{p,i}) >= N_p for every prime p."""
    primes = list(targets)
    n = len(next(iter(targets.values()))) if primes else 0
    out = []
    for i in range(n):
        cs = {p: _padic_truncation(Fraction(targets[p][i]), p, precision[p]) for p in primes}
        s = {p: max(0, -valuation(cs[p], p) if cs[p] else 0, -precision[p]) for p in primes}
        d = math.prod(p ** s[p] for p in primes)
        residue, modulus = 0, 1
        for p in primes:
            mod_p = p ** max(0, precision[p] + s[p])
            val = int(cs[p] * d) % mod_p if mod_p > 1 else 0
            # combine residue mod modulus with val mod mod_p
            t = ((val - residue) * pow(modulus, -1, mod_p)) % mod_p if mod_p > 1 else 0
            residue += modulus * t
            modulus *= mod_p
        out.append(Fraction(residue, d))
    return tuple(out)


def _min_val(m, p):
    return min(valuation(x, p) for r in m for x in r if x != 0)


def distance_to_module(module: SModule, target: Mapping) -> Magnitude:
    """min over module points gamma of ||xi - gamma||, for xi given in coefficient coordinates.

    ``target`` maps each place to x_v with xi_v = x_v g_v.  For a profile
    e of p-adic exponents the admissible coefficients form a coset of the
    constraint lattice; its best real distance A(e) is an exact CVP, and
    the distance is the min over e of max(A(e), p^-e_p).  A(e) only grows
    with e, which bounds the scan.
    """
    module._require_full()
    primes = list(module.config.primes)
    x = {_place_key(k): mx.vec(v) for k, v in dict(target).items()}
    xinf = x["inf"]
    n = module.n

    cache = {}

    def arch_dist(es):
        if es in cache:
            return cache[es]
        conds = [(p, e, module.nonarch[p]) for p, e in zip(primes, es)]
        lat = intersect_local_conditions(n, conds, primes)
        prec = {p: e - _min_val(module.nonarch[p], p) for p, e in zip(primes, es)}
        a0 = _crt_point({p: x[p] for p in primes}, prec) if primes else tuple(Fraction(0) for _ in range(n))
        _, d2 = _cvp(lat.basis, module.gram, mx.sub(xinf, a0), n)
        cache[es] = Magnitude.from_square(d2)
        return cache[es]

    def profile_value(es):
        terms = [arch_dist(es)] + [Magnitude(Fraction(p) ** -e) for p, e in zip(primes, es)]
        return max(terms, key=_K)

    if not primes:
        return arch_dist(())
    # a target on the module has distance 0; otherwise A(e) > 0 for large e
    if all(x[p] == xinf for p in primes) and all(module.config.is_integral(t) for t in xinf):
        return Magnitude(0)
    best = profile_value(tuple(0 for _ in primes))
    # an optimal point with distance d is seen by the profile e_p = least e with
    # p^-e <= t, where t is the largest power p^-k not above d; walking the
    # thresholds t downwards A grows, so stop once it reaches the best value
    heads = []
    for p in primes:
        e = 0
        while compare(Magnitude(Fraction(p) ** -e), best) == Ordering.GREATER:
            e += 1
        while compare(Magnitude(Fraction(p) ** -(e - 1)), best) != Ordering.GREATER:
            e -= 1
        heads.append(e)
    while True:
        t = max(Fraction(p) ** -e for p, e in zip(primes, heads))
        es = tuple(heads)
        a = arch_dist(es)
        if compare(a, best) != Ordering.LESS:
            return best
        v = max(a, Magnitude(t), key=_K)
        if compare(v, best) == Ordering.LESS:
            best = v
        heads = [e + 1 if Fraction(p) ** -e == t else e for p, e in zip(primes, heads)]


def _place_key(k):
    """'inf' or an int prime, from a Place, a string or an int."""
    if isinstance(k, Place):
        return "inf" if k.is_infinite else k.p
    return "inf" if k in ("inf", None) else int(k)


class _K:
    __slots__ = ("m",)

    def __init__(self, m):
        self.m = m

    def __lt__(self, other):
        return compare(self.m, other.m) == Ordering.LESS


@dataclass(frozen=True)
class CoveringEstimate:
    value: Magnitude
    target: dict
    upper: object
    within: bool


def random_targets(module: SModule, samples: int, seed: int, den: int = 16, p_digits: int = 3) -> list:
    """Targets in the fundamental domain [0,1)^n x prod Z_p^n (coefficient coordinates)."""
    rng = random.Random(seed)
    out = []
    for _ in range(samples):
        t = {"inf": tuple(Fraction(rng.randrange(den), den) for _ in range(module.n))}
        for p in module.config.primes:
            t[p] = tuple(Fraction(rng.randrange(p ** p_digits)) for _ in range(module.n))
        out.append(t)
    return out


def covering_radius_estimate(module: SModule, samples: int = 16, seed: Optional[int] = None,
                             targets: Optional[Iterable] = None, minima: Optional[MinimaResult] = None,
                             instance: str = "") -> CoveringEstimate:
    """Largest distance from the module over sampled (or given) targets.

    This is a certified lower bound for the covering radius; it must not
    exceed the upper bound of :func:`covering_radius_bounds`, otherwise a
    FalsificationError is raised.
    """
    ts = list(targets) if targets is not None else []
    if targets is None or samples:
        if seed is None and targets is None:
            raise ValueError("a seed is required for sampled targets")
        if seed is not None:
            ts += random_targets(module, samples, seed)
    if not ts:
        raise ValueError("no targets")
    bounds = covering_radius_bounds(module, minima)
    best, where = Magnitude(0), None
    for t in ts:
        d = distance_to_module(module, t)
        if where is None or compare(d, best) == Ordering.GREATER:
            best, where = d, t
    ok = compare(best, bounds.upper) != Ordering.GREATER
    est = CoveringEstimate(best, where, bounds.upper, ok)
    if not ok:
        rep = BoundReport("covering", instance, None, best, bounds.upper, False,
                          constants={"target": {str(k): [str(c) for c in v] for k, v in where.items()}})
        raise FalsificationError(rep)
    return est


def certify_rk(config: SConfig, targets: Iterable[Mapping]) -> list:
    """For each target x (one rational per place) an a in Z[1/M] with
    |x_inf - a| <= 1/2 and |x_p - a|_p <= 1, so B_r(K_S) + I_S = K_S for
    every r > 1.

    a is the sum of the p-adic fractional parts of the x_p, shifted by the
    nearest integer at infinity.  Returns (a, real distance, worst p-adic
    distance) triples; raises AssertionError if a certificate fails.
    """
    out = []
    for t in targets:
        t = {_place_key(k): as_fraction(v) for k, v in dict(t).items()}
        frac = Fraction(0)
        for p in config.primes:
            frac += _padic_fraction(t[p], p)
        a = frac + math.floor(t["inf"] - frac + Fraction(1, 2))
        dinf = abs(t["inf"] - a)
        dp = max([abs_at(t[p] - a, Place(p)).rational() for p in config.primes], default=Fraction(0))
        if dinf > Fraction(1, 2) or dp > 1:
            raise AssertionError(f"r_K certificate failed at {t}")
        out.append((a, dinf, dp))
    return out


def _padic_fraction(x: Fraction, p: int) -> Fraction:
    """The c in Z[1/p] cap [0, 1) with x - c in Z_p."""
    if x == 0 or valuation(x, p) >= 0:
        return Fraction(0)
    c = _padic_truncation(x, p, 0)
    return c - math.floor(c)


# ---------------------------------------------------------------------------
# relative covolumes of sums


def check_sum_covolume(gens1: Sequence[SVector], gens2: Sequence[SVector], instance: str = "") -> BoundReport:
    """cov_r(Gamma + Gamma') <= cov_r(Gamma) cov_r(Gamma') for trivially intersecting spans."""
    gens1, gens2 = list(gens1), list(gens2)
    config = gens1[0].config
    for pl in config.places:
        if mx.rank([v[pl] for v in gens1 + gens2]) != len(gens1) + len(gens2):
            raise SpanOverlapError(f"spans intersect nontrivially at {pl}")
    middle = relative_covolume(gens1 + gens2)
    upper = relative_covolume(gens1) * relative_covolume(gens2)
    return BoundReport("sumcov", instance, None, middle, upper, _sandwich(None, middle, upper))


# ---------------------------------------------------------------------------
# finiteness of submodules of bounded covolume


def _hnf_candidates(n: int, d: int):
    """Upper triangular integer HNFs of determinant d (diagonal d_j, entries above in [0, d_j))."""
    def diagonals(k, rest):
        if k == 1:
            yield (rest,)
            return
        for a in range(1, rest + 1):
            if rest % a == 0:
                for tail in diagonals(k - 1, rest // a):
                    yield (a,) + tail

    for dg in diagonals(n, d):
        slots = [(i, j) for j in range(n) for i in range(j)]
        ranges = [range(dg[j]) for i, j in slots]

        def fill(idx, m):
            if idx == len(slots):
                yield tuple(tuple(r) for r in m)
                return
            i, j = slots[idx]
            for v in ranges[idx]:
                m[i][j] = v
                yield from fill(idx + 1, m)
            m[i][j] = 0

        base = [[dg[i] if i == j else 0 for j in range(n)] for i in range(n)]
        yield from fill(0, base)


def s_saturate(config: SConfig, rows) -> tuple:
    """HNF of (Z[1/M] L) cap Z^n for a full-rank integer lattice L."""
    lat = IntegerLattice(rows)
    d = int(lat.determinant())
    k = max([0] + [valuation(d, p) for p in config.primes if d % p == 0])
    if k == 0 or config.M == 1:
        return hnf(rows).h
    sat = lat.scaled(Fraction(1, config.M ** k)).intersect(IntegerLattice.standard(lat.n))
    return tuple(tuple(int(x) for x in r) for r in sat.basis)


def submodules_up_to(config: SConfig, n: int, bound) -> list:
    """All I_S-submodules Gamma of I_S^n with cov(Gamma)/cov(I_S^n) <= bound.

    Each is returned as the integer HNF of Gamma cap Z^n; its index in Z^n
    is prime to M and equals the covolume.
    """
    bound = as_fraction(bound)
    if bound < 1:
        raise ValueError("bound must be at least 1")
    seen = set()
    for d in range(1, math.floor(bound) + 1):
        for h in _hnf_candidates(n, d):
            seen.add(s_saturate(config, h))
    out = []
    for h in seen:
        idx = math.prod(snf(h))
        if idx <= bound and math.gcd(idx, config.M) == 1:
            out.append((idx, h))
    return [h for _, h in sorted(out)]


def submodule(config: SConfig, h) -> SModule:
    """The module I_S^n h."""
    return SModule(config, SMatrix.diagonal(config, h))


# ---------------------------------------------------------------------------
# Mahler probe


@dataclass(frozen=True)
class ProbeReport:
    bounded_below: bool
    min_iota1: Magnitude
    members: tuple   # (id, iota_1)
    offending: tuple  # (id, iota_1, witness)
    epsilon: Fraction


def mahler_probe(family: Sequence, epsilon) -> ProbeReport:
    """iota_1 of every member; the family escapes if some iota_1 < epsilon.

    ``family`` holds modules or (id, module) pairs.
    """
    epsilon = as_fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    members = list(family)
    if not members:
        raise ValueError("empty family")
    rows, bad = [], []
    for i, m in enumerate(members):
        mid, mod = (m if isinstance(m, tuple) else (str(i), m))
        pt = first_minimum(mod)
        rows.append((mid, pt.norm))
        if compare(pt.norm, epsilon) == Ordering.LESS:
            bad.append((mid, pt.norm, pt))
    low = min((r[1] for r in rows), key=_K)
    return ProbeReport(not bad, low, tuple(rows), tuple(bad), epsilon)
