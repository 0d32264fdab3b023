"""Instance generators: random suites, classical examples, and the diagonal flow."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import _matrix as mx
from .exactnum import SConfig
from .linalg import SMatrix
from .smodule import SModule

__all__ = ["Instance", "classical_instances", "diag_flow_family", "identity_instances", "random_suite"]


@dataclass(frozen=True)
class Instance:
    id: str
    module: SModule


def _random_matrix(rng: random.Random, n: int, height: int):
    while True:
        m = tuple(tuple(Fraction(rng.randint(-height, height), rng.randint(1, height)) for _ in range(n))
                  for _ in range(n))
        if mx.det(m) != 0:
            return m


def _random_primes(rng: random.Random, pool=(2, 3, 5)):
    subsets = [c for k in range(len(pool) + 1) for c in combinations(pool, k)]
    return rng.choice(subsets)


def random_module(rng: random.Random, n: int, primes, height: int = 8) -> SModule:
    cfg = SConfig(tuple(primes))
    return SModule(cfg, SMatrix(cfg, {pl: _random_matrix(rng, n, height) for pl in cfg.places}))


def random_suite(count: int = 200, seed: int = 20240601, max_n: int = 3, height: int = 8, pool=(2, 3, 5)) -> list:
    """Full-rank modules with independent random generator matrices at every place.

    Entries are a/b with |a| <= height and 1 <= b <= height.
    """
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(1, max_n)
        primes = _random_primes(rng, pool)
        out.append(Instance(f"rand-{i:03d}", random_module(rng, n, primes, height)))
    return out


def identity_instances(pool=(2, 3, 5), dims=(1, 2, 3)) -> list:
    """I_S^n for every S inside {inf} + pool and every n in dims."""
    out = []
    for k in range(len(pool) + 1):
        for primes in combinations(pool, k):
            cfg = SConfig(primes)
            for n in dims:
                tag = "-".join(map(str, primes)) or "inf"
                out.append(Instance(f"id-{tag}-n{n}", SModule.standard(cfg, n)))
    return out


def classical_instances() -> list:
    """Real lattices (S = {inf}) with their known covering radius and a deep hole.

    Returns (instance, covering radius, deep-hole target) triples; the
    target is in coefficient coordinates.
    """
    from .exactnum import Magnitude

    cfg = SConfig(())
    z1 = SModule.standard(cfg, 1)
    z2 = SModule.standard(cfg, 2)
    d = SModule(cfg, SMatrix.diagonal(cfg, [[Fraction(1, 4), 0], [0, 4]]))
    half = Fraction(1, 2)
    return [
        (Instance("Z", z1), Magnitude(half), {"inf": (half,)}),
        (Instance("Z2", z2), Magnitude.from_square(half), {"inf": (half, half)}),
        (Instance("diag(1/4,4)", d), Magnitude.from_square(Fraction(257, 64)), {"inf": (half, half)}),
    ]


def diag_flow_family(ks=range(1, 7), p: int = 2) -> list:
    """g_inf = diag(p^-k, p^k), g_p = diag(p^k, p^-k): unimodular and escaping to infinity."""
    cfg = SConfig((p,))
    out = []
    for k in ks:
        t = Fraction(p) ** k
        g = SMatrix(cfg, {"inf": mx.diag([1 / t, t]), p: mx.diag([t, 1 / t])})
        out.append(Instance(f"k={k}", SModule(cfg, g)))
    return out


# ---------------------------------------------------------------------------
# extra data for the relative-covolume and box checks


def _random_vector(rng: random.Random, n: int, height: int):
    return tuple(Fraction(rng.randint(-height, height), rng.randint(1, height)) for _ in range(n))


def random_sum_pair(rng: random.Random, n: int, primes, height: int = 8):
    """Two generator lists of total rank <= n whose K_S-spans meet only in 0."""
    from .linalg import SVector

    cfg = SConfig(tuple(primes))
    total = rng.randint(2, n)
    m = rng.randint(1, total - 1)
    while True:
        vecs = [SVector(cfg, {pl: _random_vector(rng, n, height) for pl in cfg.places}) for _ in range(total)]
        if all(mx.rank([v[pl] for v in vecs]) == total for pl in cfg.places):
            return vecs[:m], vecs[m:]


def random_sum_pairs(count: int = 100, seed: int = 7, max_n: int = 4, pool=(2, 3, 5)) -> list:
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(2, max_n)
        out.append((f"pair-{i:03d}",) + random_sum_pair(rng, n, _random_primes(rng, pool)))
    return out


def box_just_above(module: SModule, rng: random.Random = None, slack=Fraction(1, 64)):
    """An SBox whose volume exceeds 2^n cov(module) by a factor of at most about (1 + slack)^n.

    Half-widths get random aspect ratios and the p-adic exponents random
    values in {-1, 0, 1}, compensated in the real widths.
    """
    from .exactnum import Magnitude, Ordering, compare
    from .smodule import covolume
    from .theorems import SBox

    n = module.n
    rng = rng or random.Random(0)
    ks = {p: rng.randint(-1, 1) for p in module.config.primes}
    aspects = [Fraction(2) ** rng.randint(-2, 2) for _ in range(n - 1)]
    aspects.append(1 / _prod(aspects))
    need = covolume(module)  # w^n must exceed cov * prod p^{n k_p}
    for p, k in ks.items():
        need = need * Fraction(p) ** (n * k)
    w = Fraction(need.to_float() ** (1 / n)).limit_denominator(1 << 20)
    while compare(Magnitude(w ** n), need) != Ordering.GREATER:
        w *= 1 + slack
    return SBox(tuple(w * a for a in aspects), ks)


def _prod(xs):
    out = Fraction(1)
    for x in xs:
        out *= x
    return out
