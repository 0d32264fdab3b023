"""Command line front end.

Exit codes: 0 pass, 1 a check was falsified (a JSON dump of the failing
reports goes to stderr), 2 bad input, 3 mathematical domain error,
4 the probed family escapes.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import io as sio
from .errors import FalsificationError, SadicError
from .exactnum import Magnitude, Ordering, SConfig, compare
from .smodule import DEFAULT_ITERATION_CAP, covolume, points_below, reduce, successive_minima
from .theorems import (
    BoundReport,
    _sandwich,
    check_sum_covolume,
    covering_radius_bounds,
    covering_radius_estimate,
    mahler_probe,
    minkowski_box_point,
    submodules_up_to,
    verify_minkowski,
    verify_precise,
)

EXIT_OK, EXIT_FALSIFIED, EXIT_INPUT, EXIT_DOMAIN, EXIT_ESCAPING = 0, 1, 2, 3, 4
JOBS_ENV = "SADIC_JOBS"
CHECKS = ("precise", "minkowski", "covering", "sumcov", "boxpoint")

REPORT_COLUMNS = ["check", "instance", "lower", "middle", "upper", "pass", "lower_approx", "middle_approx", "upper_approx"]


class CliInputError(Exception):
    pass


# ---------------------------------------------------------------------------
# inputs


def _read_items(path):
    if path is None:
        raise CliInputError("an input file is required")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc
    return sio.load_document(text)


def golden_suite(check: str) -> list:
    """Built-in instances for ``verify`` without an input file."""
    from .instances import (
        box_just_above,
        classical_instances,
        diag_flow_family,
        identity_instances,
        random_suite,
        random_sum_pairs,
    )
    from .exactnum import SConfig as _C
    from .linalg import SVector

    P = sio.ParsedInstance
    items = []
    if check in ("precise", "minkowski"):
        for inst in identity_instances() + [c[0] for c in classical_instances()] + diag_flow_family() + random_suite(24, seed=11):
            items.append(P(inst.id, inst.module.config, inst.module.n, inst.module))
    elif check == "covering":
        for inst, _, hole in classical_instances():
            items.append(P(inst.id, inst.module.config, inst.module.n, inst.module, targets=[hole]))
        for inst in identity_instances(dims=(1, 2)) + random_suite(8, seed=13, max_n=2):
            items.append(P(inst.id, inst.module.config, inst.module.n, inst.module))
    elif check == "sumcov":
        c0 = _C(())
        e = [SVector(c0, {"inf": r}) for r in ((1, 0), (0, 1), (1, 1))]
        items.append(P("orthogonal", c0, 2, None, generators=[e[0]], generators_b=[e[1]]))
        items.append(P("skew", c0, 2, None, generators=[e[0]], generators_b=[e[2]]))
        for pid, a, b in random_sum_pairs(20, seed=17):
            items.append(P(pid, a[0].config, a[0].n, None, generators=a, generators_b=b))
    elif check == "boxpoint":
        rng = random.Random(19)
        for inst in identity_instances(dims=(1, 2)) + random_suite(16, seed=23):
            items.append(P(inst.id, inst.module.config, inst.module.n, inst.module,
                           box=box_just_above(inst.module, rng)))
    return items


# ---------------------------------------------------------------------------
# checks


def _corrupt(rep: BoundReport) -> BoundReport:
    """Self-test of the falsification path: shrink the upper bound a millionfold."""
    scale = Fraction(1, 10 ** 6)
    rep.upper = rep.upper * scale if rep.upper is not None else rep.middle * scale
    rep.passed = _sandwich(rep.lower, rep.middle, rep.upper)
    return rep


def run_check(check: str, item, cap: int = DEFAULT_ITERATION_CAP, samples: int = 8, seed: int = 0,
              corrupt: bool = False) -> dict:
    """Evaluate one check on one parsed instance; returns the report dictionary."""
    try:
        rep = _check(check, item, cap, samples, seed)
    except FalsificationError as exc:
        rep = exc.report
        rep.instance = item.id
    if corrupt:
        rep = _corrupt(rep)
    return sio.report_to_dict(rep)


def _need_module(item):
    if item.module is None:
        raise CliInputError(f"{item.id}: instance has no generator matrices")
    return item.module


def _check(check, item, cap, samples, seed) -> BoundReport:
    if check == "sumcov":
        if not item.generators or not item.generators_b:
            raise CliInputError(f"{item.id}: sumcov needs 'generators' and 'generators_b'")
        return check_sum_covolume(item.generators, item.generators_b, instance=item.id)
    module = _need_module(item)
    if check == "boxpoint":
        if item.box is None:
            raise CliInputError(f"{item.id}: boxpoint needs a 'box'")
        pt = minkowski_box_point(module, item.box, instance=item.id)
        thr = covolume(module) * 2 ** module.n
        return BoundReport("boxpoint", item.id, thr, Magnitude(item.box.volume()), None,
                           item.box.contains(module, pt.coeffs), [pt])
    minima = successive_minima(module, iteration_cap=cap)
    if check == "precise":
        return verify_precise(module, minima, instance=item.id)
    if check == "minkowski":
        return verify_minkowski(module, minima, instance=item.id)
    if check == "covering":
        bounds = covering_radius_bounds(module, minima)
        targets = list(item.targets or [])
        est = covering_radius_estimate(module, samples, seed=seed, targets=targets, minima=minima,
                                       instance=item.id)
        # the lower bound is only comparable with a certified deep hole
        lower = bounds.lower if item.targets else None
        rep = BoundReport("covering", item.id, lower, est.value, bounds.upper,
                          _sandwich(lower, est.value, bounds.upper),
                          constants={"iota_lower": bounds.lower, "sharp_upper": bounds.sharp_upper,
                                     "r_K": bounds.r_k, "samples": samples, "seed": seed,
                                     "worst_target": {str(k): list(v) for k, v in est.target.items()}})
        return rep
    raise CliInputError(f"unknown check {check!r}")


def _approx(d):
    if d is None:
        return ""
    if "sum" in d:
        return repr(sum(float(Fraction(t["coeff"])) * sio.decode_magnitude(t).to_float() for t in d["sum"]))
    return repr(sio.decode_magnitude(d).to_float())


def _text(d):
    if d is None:
        return ""
    if "sum" in d:
        return " + ".join(str(sio.decode_magnitude(t)) if t["coeff"] == "1" else f"{t['coeff']}*{sio.decode_magnitude(t)}"
                          for t in d["sum"]) or "0"
    return str(sio.decode_magnitude(d))


def _report_rows(reports):
    rows = []
    for r in reports:
        rows.append({"check": r["check"], "instance": r["instance"], "lower": _text(r["lower"]),
                     "middle": _text(r["middle"]), "upper": _text(r["upper"]), "pass": str(r["pass"]).lower(),
                     "lower_approx": _approx(r["lower"]), "middle_approx": _approx(r["middle"]),
                     "upper_approx": _approx(r["upper"])})
    return rows


def _map(fn, args_list, jobs):
    if jobs <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        futs = [ex.submit(fn, *a) for a in args_list]
        return [f.result() for f in futs]


# ---------------------------------------------------------------------------
# commands


def cmd_verify(args):
    items = golden_suite(args.which) if args.input in (None, "golden") else _read_items(args.input)["items"]
    reports = _map(run_check, [(args.which, it, args.iteration_cap, args.samples, args.seed, args.corrupt_bound)
                               for it in items], args.jobs)
    failed = [r for r in reports if not r["pass"]]
    payload = {"check": args.which, "count": len(reports), "failed": len(failed), "reports": reports}
    code = EXIT_OK
    if failed:
        sys.stderr.write(sio.dump_json({"falsified": failed}))
        code = EXIT_FALSIFIED
    return payload, (_report_rows(reports), REPORT_COLUMNS), code


def _minima_one(item, cap):
    res = successive_minima(_need_module(item), iteration_cap=cap)
    return {"instance": item.id, "minima": sio.encode(list(res.minima)), "witnesses": sio.encode(list(res.witnesses))}


def cmd_minima(args):
    doc = _read_items(args.input)
    out = _map(_minima_one, [(it, args.iteration_cap) for it in doc["items"]], args.jobs)
    rows = []
    for r in out:
        for i, (m, w) in enumerate(zip(r["minima"], r["witnesses"]), 1):
            rows.append({"instance": r["instance"], "m": i, "minimum": _text(m), "approx": _approx(m),
                         "witness": " ".join(w["coeffs"])})
    payload = out[0] if doc["kind"] == "instance" else {"results": out}
    return payload, (rows, ["instance", "m", "minimum", "approx", "witness"]), EXIT_OK


def cmd_cov(args):
    doc = _read_items(args.input)
    out = [{"instance": it.id, "covolume": sio.encode(covolume(_need_module(it)))} for it in doc["items"]]
    rows = [{"instance": r["instance"], "covolume": _text(r["covolume"]), "approx": _approx(r["covolume"])} for r in out]
    payload = out[0] if doc["kind"] == "instance" else {"results": out}
    return payload, (rows, ["instance", "covolume", "approx"]), EXIT_OK


def _reduce_one(item, cap):
    module = _need_module(item)
    minima = successive_minima(module, iteration_cap=cap)
    red = reduce(module, minima)
    short = points_below(red.module, 1)
    product = red.det_content * red.witness_content
    ok = not short and product == 1
    return {
        "instance": item.id,
        "pass": ok,
        "nonarch": {str(p): [[sio.fmt_rational(x) for x in r] for r in m] for p, m in red.nonarch.items()},
        "arch_gram": [[sio.fmt_rational(x) for x in r] for r in red.arch_gram] if red.arch_gram else None,
        "reduced_gram": [[sio.fmt_rational(x) for x in r] for r in red.module.gram],
        "det_content": sio.encode(red.det_content),
        "witness_content": sio.encode(red.witness_content),
        "short_points": sio.encode(short),
    }


def cmd_reduce(args):
    doc = _read_items(args.input)
    out = _map(_reduce_one, [(it, args.iteration_cap) for it in doc["items"]], args.jobs)
    rows = [{"instance": r["instance"], "pass": str(r["pass"]).lower(), "det_content": _text(r["det_content"]),
             "witness_content": _text(r["witness_content"])} for r in out]
    code = EXIT_OK
    bad = [r for r in out if not r["pass"]]
    if bad:
        sys.stderr.write(sio.dump_json({"falsified": bad}))
        code = EXIT_FALSIFIED
    payload = out[0] if doc["kind"] == "instance" else {"results": out}
    return payload, (rows, ["instance", "pass", "det_content", "witness_content"]), code


def cmd_probe(args):
    doc = _read_items(args.input)
    family = [(it.id, _need_module(it)) for it in doc["items"]]
    if not family:
        raise CliInputError("empty family")
    eps = sio.parse_rational(args.eps)
    if eps <= 0:
        raise CliInputError("--eps must be positive")
    rep = mahler_probe(family, eps)
    offending = {mid for mid, _, _ in rep.offending}
    payload = {
        "epsilon": sio.fmt_rational(eps),
        "bounded_below": rep.bounded_below,
        "min_iota1": sio.encode(rep.min_iota1),
        "members": [{"id": mid, "iota1": sio.encode(v), "escaping": mid in offending} for mid, v in rep.members],
        "offending": [{"id": mid, "iota1": sio.encode(v), "witness": sio.encode(w)} for mid, v, w in rep.offending],
    }
    rows = [{"id": m["id"], "iota1": _text(m["iota1"]), "approx": _approx(m["iota1"]),
             "escaping": str(m["escaping"]).lower()} for m in payload["members"]]
    return payload, (rows, ["id", "iota1", "approx", "escaping"]), EXIT_OK if rep.bounded_below else EXIT_ESCAPING


def cmd_submodules(args):
    try:
        primes = tuple(int(p) for p in args.primes.split(",") if p.strip()) if args.primes else ()
        cfg = SConfig(primes)
    except ValueError as exc:
        raise CliInputError(f"bad --primes: {exc}") from exc
    if args.n < 1:
        raise CliInputError("--n must be positive")
    bound = sio.parse_rational(args.bound)
    if bound < 1:
        raise CliInputError("--bound must be at least 1")
    mods = submodules_up_to(cfg, args.n, bound)
    from .zlattice import snf
    import math

    listing = [{"index": math.prod(snf(h)), "hnf": [list(r) for r in h]} for h in mods]
    payload = {"primes": list(primes), "n": args.n, "bound": sio.fmt_rational(bound), "count": len(mods),
               "modules": listing}
    rows = [{"index": m["index"], "hnf": ";".join(",".join(map(str, r)) for r in m["hnf"])} for m in listing]
    return payload, (rows, ["index", "hnf"]), EXIT_OK


def _estimate_one(item, samples, seed, cap):
    module = _need_module(item)
    minima = successive_minima(module, iteration_cap=cap)
    try:
        est = covering_radius_estimate(module, samples, seed=seed, targets=item.targets, minima=minima,
                                       instance=item.id)
    except FalsificationError as exc:
        return {"instance": item.id, "within": False, "report": sio.report_to_dict(exc.report)}
    return {"instance": item.id, "estimate": sio.encode(est.value), "upper": sio.encode(est.upper),
            "within": est.within, "target": {str(k): [sio.fmt_rational(x) for x in v] for k, v in est.target.items()}}


def cmd_estimate(args):
    if args.seed is None:
        raise CliInputError("--seed is required for sampling")
    if args.samples < 1:
        raise CliInputError("--samples must be positive")
    doc = _read_items(args.input)
    out = _map(_estimate_one, [(it, args.samples, args.seed, args.iteration_cap) for it in doc["items"]], args.jobs)
    rows = [{"instance": r["instance"], "estimate": _text(r.get("estimate")), "upper": _text(r.get("upper")),
             "within": str(r["within"]).lower()} for r in out]
    code = EXIT_OK
    bad = [r for r in out if not r["within"]]
    if bad:
        sys.stderr.write(sio.dump_json({"falsified": bad}))
        code = EXIT_FALSIFIED
    payload = out[0] if doc["kind"] == "instance" else {"results": out}
    return payload, (rows, ["instance", "estimate", "upper", "within"]), code


# ---------------------------------------------------------------------------


def _positive_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _default_jobs():
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--jobs", type=_positive_int, default=_default_jobs(),
                        help=f"worker processes for suites (default ${JOBS_ENV} or 1)")
    common.add_argument("--iteration-cap", type=_positive_int, default=DEFAULT_ITERATION_CAP,
                        help="limit on radius steps in the minima search")

    parser = _Parser(prog="sadic", description="S-adic geometry of numbers over Q.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, fn, helptext in (("minima", cmd_minima, "successive minima and witnesses"),
                               ("cov", cmd_cov, "covolume"),
                               ("reduce", cmd_reduce, "rescale so the open unit ball holds no point")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("input")
        p.set_defaults(func=fn)

    p = sub.add_parser("verify", parents=[common], help="run a theorem check on an instance or suite")
    p.add_argument("which", choices=CHECKS)
    p.add_argument("input", nargs="?", help="instance or suite file; omit (or 'golden') for the built-in suite")
    p.add_argument("--samples", type=_positive_int, default=8, help="covering: random targets per instance")
    p.add_argument("--seed", type=int, default=0, help="covering: sampling seed")
    p.add_argument("--corrupt-bound", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("probe", parents=[common], help="first minima of a family against --eps")
    p.add_argument("input")
    p.add_argument("--eps", required=True)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("submodules", parents=[common], help="submodules of I_S^n of bounded covolume")
    p.add_argument("--primes", default="", help="comma separated primes of S")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bound", required=True)
    p.set_defaults(func=cmd_submodules)

    p = sub.add_parser("estimate-covering", parents=[common], help="sampled lower estimate of the covering radius")
    p.add_argument("input")
    p.add_argument("--samples", type=_positive_int, default=16)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, (rows, cols), code = args.func(args)
    except (CliInputError, sio.InstanceError) as exc:
        sys.stderr.write(f"sadic: input error: {exc}\n")
        return EXIT_INPUT
    except SadicError as exc:
        sys.stderr.write(f"sadic: domain error: {type(exc).__name__}: {exc}\n")
        return EXIT_DOMAIN
    text = sio.rows_to_csv(rows, cols) if args.format == "csv" else sio.dump_json(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
