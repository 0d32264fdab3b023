import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from sadic import _matrix as mx
from sadic.errors import IterationLimitError, RankDeficiencyError, SingularMatrixError, ZeroContentError
from sadic.exactnum import Magnitude, SConfig
from sadic.instances import random_module
from sadic.linalg import Radius, SMatrix, SVector, content, norm
from sadic.smodule import (
    SModule,
    balance,
    covolume,
    first_minimum,
    points_below,
    points_in_ball,
    rank_check,
    reduce,
    relative_covolume,
    successive_minima,
)

F = Fraction


def mod(primes, **mats):
    cfg = SConfig(tuple(primes))
    return SModule(cfg, SMatrix(cfg, {("inf" if k == "inf" else int(k[1:])): v for k, v in mats.items()}))


def coeff_list(points):
    return [p.coeffs for p in points]


# -- covolume and ranks

def test_covolume_examples():
    assert covolume(SModule.standard(SConfig((2, 3)), 3)) == Magnitude(1)
    assert covolume(mod([3], inf=[[F(1, 3)]], p3=[[F(1, 3)]])) == Magnitude(1)
    assert covolume(mod([], inf=[[F(1, 4), 0], [0, 4]])) == Magnitude(1)
    assert covolume(mod([2], inf=[[1, 1], [0, 3]], p2=[[4, 0], [0, 1]])) == Magnitude(F(3, 4))


def test_singular_module_rejected():
    with pytest.raises(SingularMatrixError):
        mod([2], inf=[[1, 0], [0, 1]], p2=[[1, 2], [2, 4]])


def test_relative_covolume_examples():
    c0 = SConfig(())
    assert relative_covolume([SVector(c0, {"inf": (3, 4)})]) == Magnitude(5)
    c2 = SConfig((2,))
    assert relative_covolume([SVector(c2, {"inf": (3, 4), 2: (2, 0)})]) == Magnitude(F(5, 2))
    with pytest.raises(RankDeficiencyError):
        relative_covolume([SVector(c0, {"inf": (1, 2)}), SVector(c0, {"inf": (2, 4)})])


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_relative_covolume_against_plucker(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    m = rng.randint(1, n)
    cfg = SConfig(rng.choice([(), (2,), (3,), (2, 5)]))
    while True:
        gens = [SVector(cfg, {pl: tuple(F(rng.randint(-6, 6), rng.randint(1, 6)) for _ in range(n))
                              for pl in cfg.places}) for _ in range(m)]
        if all(mx.rank([v[pl] for v in gens]) == m for pl in cfg.places):
            break
    by_place = {("inf" if pl.is_infinite else pl.p): [v[pl] for v in gens] for pl in cfg.places}
    assert relative_covolume(gens) == oracles.plucker_covolume(by_place, cfg.primes)


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_relative_covolume_full_rank_is_covolume(seed):
    rng = random.Random(seed)
    m = random_module(rng, rng.randint(1, 3), rng.choice([(), (2,), (3, 5)]))
    gens = [m.g.row(i) for i in range(m.n)]
    assert relative_covolume(gens) == covolume(m)


def test_rank_check_examples():
    cfg = SConfig((2,))
    m = mod([2], inf=[[1, 2], [3, 5]], p2=[[2, 1], [1, 1]])
    assert rank_check(m, [(1, 0), (0, 1)]) == 2
    assert rank_check(m, [(1, 0), (2, 0)]) == 1
    assert rank_check(m, [(1, 2), (F(1, 2), 1)]) == 1
    assert rank_check(SModule.standard(cfg, 3), [(1, 0, 0), (0, 1, 0), (0, 0, 1)]) == 3
    with pytest.raises(ValueError):
        rank_check(m, [(1, 0, 0)])


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_rank_equality_random(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    m = random_module(rng, n, rng.choice([(2,), (3,), (2, 3, 5)]))
    rows = [tuple(F(rng.randint(-3, 3), rng.choice([1, 2, 3])) for _ in range(n)) for _ in range(rng.randint(1, 3))]
    assert rank_check(m, rows) == mx.rank(rows)


# -- points in balls

def test_points_in_ball_examples():
    c2 = SConfig((2,))
    z = SModule.standard(c2, 1)
    assert coeff_list(points_in_ball(z, Radius.uniform(F(101, 100), c2))) == [(-1,), (1,)]
    assert points_in_ball(z, Radius.uniform(1, c2)) == []
    d = mod([], inf=[[F(1, 4), 0], [0, 4]])
    pts = points_in_ball(d, Radius(F(1, 2)))
    assert coeff_list(pts) == [(-1, 0), (1, 0)]
    assert [p.value[pl] for p in pts for pl in p.value.config.places] == [(F(-1, 4), 0), (F(1, 4), 0)]


def test_points_below_irrational_radius():
    z2 = SModule.standard(SConfig(()), 2)
    pts = points_below(z2, Magnitude.from_square(2))
    assert sorted(coeff_list(pts)) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    pts = points_below(z2, Magnitude.from_square(F(21, 10)))
    assert len(pts) == 8


def test_points_have_exact_norms():
    m = mod([3], inf=[[1, 2], [0, 3]], p3=[[F(1, 3), 0], [1, 1]])
    for p in points_in_ball(m, Radius.uniform(3, m.config)):
        assert p.norm == norm(p.value)
        assert p.norm < Magnitude(3)


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_points_in_ball_matches_scan(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 2)
    primes = rng.choice([(), (2,), (3,), (2, 3)])
    m = random_module(rng, n, primes, height=4)
    r = F(rng.randint(1, 8), 2)
    exps = {p: rng.randint(-2, 2) for p in primes}
    g = {"inf": m.g["inf"], **{p: m.g[p] for p in primes}}
    while oracles.box_size(g, r, exps) > 20000:
        r /= 2
    got = coeff_list(points_in_ball(m, Radius(r, exps)))
    assert got == oracles.scan_ball(g, primes, r, exps)


# -- successive minima

def test_minima_identity():
    for primes in [(), (2,), (3, 5), (2, 3, 5)]:
        for n in (1, 2, 3):
            res = successive_minima(SModule.standard(SConfig(primes), n))
            assert res.minima == (Magnitude(1),) * n


def test_minima_examples():
    d = mod([], inf=[[F(1, 4), 0], [0, 4]])
    res = successive_minima(d)
    assert res.minima == (Magnitude(F(1, 4)), Magnitude(4))
    m = mod([3], inf=[[F(1, 3)]], p3=[[F(1, 3)]])
    res = successive_minima(m)
    assert res.minima == (Magnitude(1),)
    assert res.witnesses[0].coeffs == (3,)
    assert first_minimum(m).coeffs == (3,)


def test_iteration_cap():
    m = mod([], inf=[[10**6, 0], [0, 10**6]])
    with pytest.raises(IterationLimitError):
        successive_minima(m, iteration_cap=2)


def _check_result(m, res):
    assert list(res.minima) == sorted(res.minima)
    assert mx.rank([w.coeffs for w in res.witnesses]) == m.n
    for w, iota in zip(res.witnesses, res.minima):
        assert w.norm == iota
        for x in w.coeffs:
            d = x.denominator
            for p in m.config.primes:
                while d % p == 0:
                    d //= p
            assert d == 1


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_minima_against_greedy_scan(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 2)
    primes = rng.choice([(), (2,), (3,), (2, 3)])
    m = random_module(rng, n, primes, height=4)
    g = {"inf": m.g["inf"], **{p: m.g[p] for p in primes}}
    want = oracles.greedy_minima(g, primes)
    res = successive_minima(m)
    _check_result(m, res)
    if want is not None:
        assert list(res.minima) == want


def _unimodular_over_is(rng, n, primes):
    u = [[F(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(5):
        if n > 1:
            i, j = rng.sample(range(n), 2)
            c = F(rng.randint(-2, 2), rng.choice([1] + [p for p in primes]))
            u[i] = [a + c * b for a, b in zip(u[i], u[j])]
    for i in range(n):
        unit = F(1)
        for p in primes:
            unit *= F(p) ** rng.randint(-1, 1)
        u[i] = [unit * x for x in u[i]]
    perm = list(range(n))
    rng.shuffle(perm)
    return [u[k] for k in perm]


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_minima_invariant_under_basis_change(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    primes = rng.choice([(), (2,), (3,), (2, 5)])
    m = random_module(rng, n, primes, height=5)
    u = _unimodular_over_is(rng, n, primes)
    m2 = SModule(m.config, SMatrix(m.config, {pl: mx.matmul(u, m.g[pl]) for pl in m.config.places}))
    assert covolume(m2) == covolume(m)
    assert successive_minima(m2).minima == successive_minima(m).minima


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_product_formula_floor(seed):
    rng = random.Random(seed)
    primes = rng.choice([(2,), (3,), (2, 3)])
    m = random_module(rng, rng.randint(1, 2), primes, height=4)
    s = m.config.size
    for p in points_below(m, Magnitude(2))[:20]:
        assert content(p.value) <= p.norm ** s
    z = SModule.standard(m.config, 2)
    for p in points_below(z, Magnitude(3)):
        assert content(p.value) >= Magnitude(1)


# -- reduction

def test_reduce_examples():
    for m in [SModule.standard(SConfig((2, 3)), 2), mod([], inf=[[F(1, 4), 0], [0, 4]]),
              mod([3], inf=[[F(1, 3)]], p3=[[F(1, 3)]])]:
        red = reduce(m)
        assert red.det_content * red.witness_content == Magnitude(1)
        assert points_below(red.module, Magnitude(1)) == []
    red = reduce(mod([3], inf=[[F(1, 3)]], p3=[[F(1, 3)]]))
    assert successive_minima(red.module).minima == (Magnitude(1),)


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_reduce_random(seed):
    rng = random.Random(seed)
    m = random_module(rng, rng.randint(1, 3), rng.choice([(), (2,), (3, 5)]), height=6)
    red = reduce(m)
    assert red.det_content * red.witness_content == Magnitude(1)
    assert points_below(red.module, Magnitude(1)) == []
    if red.arch_gram is not None:
        # the stored g'_inf Gram pulls back to the coefficient Gram
        g = m.g["inf"]
        assert mx.matmul(mx.matmul(g, red.arch_gram), mx.transpose(g)) == red.module.gram


# -- balance

def brute_balance(xi, span=6):
    primes = xi.config.primes
    best = None
    for es in itertools.product(range(-span, span + 1), repeat=len(primes)):
        u = F(1)
        for p, e in zip(primes, es):
            u *= F(p) ** e
        v = norm(xi.scale(u))
        if best is None or v < best:
            best = v
    return best


def test_balance_examples():
    c2 = SConfig((2,))
    u, rep = balance(SVector(c2, {"inf": (8,), 2: (8,)}))
    assert u == F(1, 8) and rep.norm_after == Magnitude(1)
    assert rep.norm_after ** 2 == rep.content
    c0 = SConfig(())
    u, rep = balance(SVector(c0, {"inf": (3, 4)}))
    assert u == 1 and rep.norm_after == rep.content == Magnitude(5)
    c23 = SConfig((2, 3))
    xi = SVector(c23, {"inf": (36,), 2: (36,), 3: (36,)})
    u, rep = balance(xi)
    assert rep.content == Magnitude(1)
    assert rep.norm_after == brute_balance(xi) == Magnitude(1)
    assert norm(xi.scale(u)) == rep.norm_after
    # the unit 1/36 leaves every place at 1
    assert u == F(1, 36)


def test_balance_zero_content():
    with pytest.raises(ZeroContentError):
        balance(SVector(SConfig((2,)), {"inf": (1,), 2: (0,)}))


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_balance_against_brute_force(seed):
    rng = random.Random(seed)
    cfg = SConfig(rng.choice([(2,), (3,), (2, 3), (2, 5)]))
    n = rng.randint(1, 2)
    xi = SVector(cfg, {pl: tuple(F(rng.randint(-9, 9) or 1, rng.randint(1, 9)) for _ in range(n))
                       for pl in cfg.places})
    u, rep = balance(xi)
    assert cfg.is_unit(u)
    assert content(xi.scale(u)) == content(xi)
    assert rep.norm_after == norm(xi.scale(u)) == brute_balance(xi)
    assert rep.within_bound
    assert rep.norm_after ** cfg.size <= rep.content * rep.constant
