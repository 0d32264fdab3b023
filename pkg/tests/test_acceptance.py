"""Acceptance suite: one test per criterion, each printing a single result line.

Run with ``pytest -m acceptance``; the lines are also repeated in the
terminal summary.  Time limits are wall-clock and pinned below.
"""

import contextlib
import io
import json
import random
import time
from fractions import Fraction
from functools import lru_cache

import pytest

import oracles
from sadic import io as sio
from sadic.cli import main
from sadic.exactnum import Magnitude, Place, SConfig, abs_at
from sadic.instances import (
    classical_instances,
    diag_flow_family,
    identity_instances,
    random_module,
    random_suite,
    random_sum_pairs,
)
from sadic.linalg import Radius, SVector, gram_schmidt_nonarch
from sadic import _matrix as mx
from sadic.smodule import SModule, points_below, points_in_ball, reduce, successive_minima
from sadic.theorems import (
    check_sum_covolume,
    covering_radius_bounds,
    covering_radius_estimate,
    mahler_probe,
    submodules_up_to,
    verify_minkowski,
    verify_precise,
)

pytestmark = pytest.mark.acceptance

F = Fraction

LIMIT_IDENTITY = 1.0
LIMIT_PRECISE = 120.0
LIMIT_GRAM_SCHMIDT = 30.0
LIMIT_COUNTS = 10.0

RESULTS = []


def report(num, name, ok, detail):
    line = f"criterion {num} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print(line)
    return ok


@lru_cache(maxsize=None)
def suite():
    return tuple(random_suite(200))


_minima = {}


def suite_minima():
    for inst in suite():
        if inst.id not in _minima:
            _minima[inst.id] = successive_minima(inst.module)
    return _minima


def test_1_identity_baseline():
    t = time.perf_counter()
    bad = []
    insts = identity_instances((2, 3, 5), (1, 2, 3))
    for inst in insts:
        res = successive_minima(inst.module)
        if res.minima != tuple(Magnitude(1) for _ in range(inst.module.n)):
            bad.append(inst.id)
    dt = time.perf_counter() - t
    ok = not bad and dt < LIMIT_IDENTITY
    report(1, "identity baseline", ok, f"{len(insts)} modules, {len(bad)} wrong, {dt:.2f}s < {LIMIT_IDENTITY}s")
    assert not bad
    assert dt < LIMIT_IDENTITY


def test_2_precise_sandwich():
    t = time.perf_counter()
    mins = suite_minima()
    failed = [i.id for i in suite() if not verify_precise(i.module, mins[i.id], i.id).passed]
    dt = time.perf_counter() - t
    ok = not failed and dt < LIMIT_PRECISE
    report(2, "precise sandwich", ok, f"{len(suite())} instances, {len(failed)} failed, {dt:.1f}s < {LIMIT_PRECISE}s")
    assert not failed, failed
    assert dt < LIMIT_PRECISE


def test_3_minkowski_sandwich():
    mins = suite_minima()
    failed, consts = [], {}
    for i in suite():
        rep = verify_minkowski(i.module, mins[i.id], i.id)
        if not rep.passed:
            failed.append(i.id)
        key = (i.module.config.primes, i.module.n)
        consts[key] = rep.constants["C^n*2^n"]
    shown = ", ".join(f"S={{inf{''.join(',' + str(p) for p in k[0])}}} n={k[1]}: {v}"
                      for k, v in sorted(consts.items())[:6])
    report(3, "minkowski sandwich", not failed,
           f"{len(failed)} failed; upper constants C^n 2^n e.g. {shown}; {len(consts)} (S, n) pairs")
    assert not failed, failed


def _independent(rng, n, m, height=8):
    while True:
        rows = [tuple(F(rng.randint(-height, height), rng.randint(1, height)) for _ in range(n)) for _ in range(m)]
        if mx.rank(rows) == m:
            return rows


def _sup(x, p):
    return max(abs_at(t, Place(p)) for t in x)


def test_4_ultrametric_gram_schmidt():
    t = time.perf_counter()
    bad = 0
    checked = 0
    for p in (2, 3, 5):
        rng = random.Random(1000 + p)
        for _ in range(100):
            n = rng.randint(1, 4)
            m = rng.randint(1, n)
            etas, _ = gram_schmidt_nonarch(_independent(rng, n, m), p)
            for _ in range(100):
                a = [F(rng.randint(-60, 60), rng.choice([1, 7, p, p ** 2, p ** 3])) for _ in range(m)]
                combo = [sum(a[i] * etas[i][k] for i in range(m)) for k in range(n)]
                checked += 1
                if _sup(combo, p) != max(abs_at(x, Place(p)) for x in a):
                    bad += 1
    dt = time.perf_counter() - t
    ok = bad == 0 and dt < LIMIT_GRAM_SCHMIDT
    report(4, "ultrametric gram-schmidt", ok, f"{checked} tuples, {bad} wrong, {dt:.1f}s < {LIMIT_GRAM_SCHMIDT}s")
    assert bad == 0
    assert dt < LIMIT_GRAM_SCHMIDT


def test_5_reduction():
    mins = suite_minima()
    short, unbalanced = [], []
    for i in suite():
        red = reduce(i.module, mins[i.id])
        if points_below(red.module, 1):
            short.append(i.id)
        if red.det_content * red.witness_content != Magnitude(1):
            unbalanced.append(i.id)
    ok = not short and not unbalanced
    report(5, "reduction", ok, f"{len(short)} with points of norm < 1, {len(unbalanced)} with content product != 1")
    assert not short, short
    assert not unbalanced, unbalanced


def test_6_sum_covolume():
    pairs = random_sum_pairs(100)
    failed = [pid for pid, a, b in pairs if not check_sum_covolume(a, b, pid).passed]
    equal = True
    for primes in [(), (2,), (3, 5)]:
        cfg = SConfig(primes)
        for n in (2, 3, 4):
            std = [SVector(cfg, {pl: tuple(F(int(i == j)) for j in range(n)) for pl in cfg.places}) for i in range(n)]
            for k in range(1, n):
                rep = check_sum_covolume(std[:k], std[k:])
                equal &= rep.passed and rep.middle == rep.upper
    ok = not failed and equal
    report(6, "sum covolume", ok, f"{len(pairs)} pairs, {len(failed)} failed; orthogonal equality case {'holds' if equal else 'broken'}")
    assert not failed, failed
    assert equal


def test_7_covering_radius():
    classical_ok = []
    for inst, radius, _ in classical_instances():
        b = covering_radius_bounds(inst.module)
        classical_ok.append(b.lower <= radius <= b.upper)
    mins = suite_minima()
    above = []
    for i in suite():
        est = covering_radius_estimate(i.module, samples=4, seed=1, minima=mins[i.id], instance=i.id)
        if not (est.within and est.value <= covering_radius_bounds(i.module, mins[i.id]).upper):
            above.append(i.id)
    ok = all(classical_ok) and not above
    report(7, "covering radius", ok,
           f"classical {sum(classical_ok)}/{len(classical_ok)} inside bounds; {len(above)} estimates above upper")
    assert all(classical_ok)
    assert not above, above


@pytest.mark.parametrize("bound", [3, 5, 9])
def test_8_submodule_counts(bound):
    cfg = SConfig((2,))
    t = time.perf_counter()
    got = len(submodules_up_to(cfg, 2, bound))
    dt = time.perf_counter() - t
    formula = 1 + sum(oracles.sigma(d) for d in range(3, bound + 1) if d % 2)
    brute = oracles.sublattice_count(bound, cfg.M)
    ok = got == formula == brute and dt < LIMIT_COUNTS
    report(8, f"submodule counts B={bound}", ok, f"got {got}, formula {formula}, brute force {brute}, {dt:.2f}s < {LIMIT_COUNTS}s")
    assert got == formula == brute
    assert dt < LIMIT_COUNTS


def _family_file(tmp_path, name, modules):
    doc = {"schema_version": 1, "family": [
        {k: v for k, v in sio.instance_to_json(m, mid).items() if k != "schema_version"} for mid, m in modules]}
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _cli(*argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
        code = main(list(argv))
    return code


def test_9_mahler_probe(tmp_path):
    flow = [(i.id, i.module) for i in diag_flow_family()]
    eps = F(1, 4)
    rep = mahler_probe(flow, eps)
    iotas = [iota for _, iota in rep.members]
    small = all(iota <= Magnitude(F(1, 2 ** k)) for iota, k in zip(iotas, range(1, 7)))
    decreasing = all(b <= a for a, b in zip(iotas, iotas[1:]))
    flagged = [mid for mid, *_ in rep.offending]
    constant = [(f"c{j}", SModule.standard(SConfig((2,)), 2)) for j in range(3)]
    crep = mahler_probe(constant, eps)
    code_flow = _cli("probe", _family_file(tmp_path, "flow.json", flow), "--eps", "1/4")
    code_const = _cli("probe", _family_file(tmp_path, "const.json", constant), "--eps", "1/4")
    ok = (small and decreasing and flagged == ["k=3", "k=4", "k=5", "k=6"] and not rep.bounded_below
          and crep.bounded_below and (code_flow, code_const) == (4, 0))
    report(9, "mahler probe", ok, f"flagged {flagged}, iota_1 <= 2^-k {small}, monotone {decreasing}, "
                                   f"exit codes {code_flow}/{code_const}")
    assert small and decreasing
    assert flagged == ["k=3", "k=4", "k=5", "k=6"] and not rep.bounded_below
    assert crep.bounded_below
    assert (code_flow, code_const) == (4, 0)


RADII = [F(1, 2), F(1), F(3, 2), F(2), F(3), F(4)]


def _canon(coeff_lists):
    return json.dumps([[str(x) for x in a] for a in coeff_lists])


def test_10_points_in_ball_oracle():
    # 4 modules per (S, n), drawn at height 4 among those whose scan box at radius 4 stays small
    mismatched, total = [], 0
    for primes in [(), (2,), (3,), (2, 3)]:
        for n in (1, 2):
            rng = random.Random(f"{primes}-{n}")
            kept = 0
            while kept < 4:
                m = random_module(rng, n, primes, height=4)
                g = {"inf": m.g["inf"], **{p: m.g[p] for p in primes}}
                if oracles.box_size(g, F(4), oracles.uniform_exps(primes, F(4))) > 40000:
                    continue
                kept += 1
                for r in RADII:
                    rad = Radius.uniform(r, m.config)
                    exps = {p: rad.nonarch[p] for p in primes}
                    got = _canon(p.coeffs for p in points_in_ball(m, rad))
                    want = _canon(oracles.scan_ball(g, primes, r, exps))
                    total += 1
                    if got != want:
                        mismatched.append((primes, n, str(r)))
    report(10, "points_in_ball oracle", not mismatched, f"{total} balls, {len(mismatched)} mismatched")
    assert not mismatched, mismatched
