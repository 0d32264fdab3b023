"""JSON instance files and report serialisation.

Instance file (schema_version 1)::

    {"schema_version": 1, "id": "ex", "primes": [2, 3], "n": 2,
     "inf": [["1", "0"], ["0", "1"]], "2": [...], "3": [...]}

Rationals are strings "a/b" or "a".  A family file has ``"family": [...]``
and a suite file ``"instances": [...]``, each a list of instance objects
(without their own schema_version).  Optional keys: ``"generators"`` and
``"generators_b"`` (lists of per-place vectors, for relative covolumes),
``"box"`` ({"arch": [...], "nonarch": {"2": k}}) and ``"targets"``
(coefficient-coordinate points, for covering-radius estimates).
"""

from __future__ import annotations

import csv
import io as _io
import json
from fractions import Fraction
from typing import Any

from .exactnum import Magnitude, SConfig, SurdSum
from .linalg import SMatrix, SVector
from .smodule import ModulePoint, SModule

SCHEMA_VERSION = 1

__all__ = [
    "InstanceError",
    "SCHEMA_VERSION",
    "decode_magnitude",
    "dump_json",
    "encode",
    "instance_to_json",
    "load_document",
    "parse_instance",
    "parse_rational",
    "report_to_dict",
    "rows_to_csv",
]


class InstanceError(ValueError):
    """Malformed input file."""


def parse_rational(s) -> Fraction:
    if isinstance(s, bool):
        raise InstanceError(f"not a rational: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise InstanceError(f"rationals must be strings, got {s!r}")
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceError(f"not a rational: {s!r}") from exc


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _matrix(obj, n: int, where: str):
    if not isinstance(obj, list) or len(obj) != n or any(not isinstance(r, list) or len(r) != n for r in obj):
        raise InstanceError(f"{where}: expected an {n}x{n} matrix")
    return tuple(tuple(parse_rational(x) for x in r) for r in obj)


def _vector(obj, n: int, where: str):
    if not isinstance(obj, list) or len(obj) != n:
        raise InstanceError(f"{where}: expected a vector of length {n}")
    return tuple(parse_rational(x) for x in obj)


def _config(obj) -> SConfig:
    primes = obj.get("primes", [])
    if not isinstance(primes, list) or any(not isinstance(p, int) or isinstance(p, bool) for p in primes):
        raise InstanceError("primes must be a list of integers")
    try:
        return SConfig(tuple(primes))
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc


def _place_vectors(cfg: SConfig, obj, n: int, where: str) -> SVector:
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object keyed by place")
    try:
        return SVector(cfg, {("inf" if k == "inf" else int(k)): _vector(v, n, f"{where}[{k}]") for k, v in obj.items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"{where}: {exc}") from exc


class ParsedInstance:
    """An instance file entry: the module plus optional extra data."""

    def __init__(self, id, config, n, module, generators=None, generators_b=None, box=None, targets=None, raw=None):
        self.id = id
        self.config = config
        self.n = n
        self.module = module
        self.generators = generators
        self.generators_b = generators_b
        self.box = box
        self.targets = targets
        self.raw = raw


def parse_instance(obj: Any, default_id: str = "instance") -> ParsedInstance:
    if not isinstance(obj, dict):
        raise InstanceError("instance must be a JSON object")
    if "schema_version" in obj and obj["schema_version"] != SCHEMA_VERSION:
        raise InstanceError(f"unsupported schema_version {obj['schema_version']!r}")
    cfg = _config(obj)
    n = obj.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceError("n must be a positive integer")
    iid = str(obj.get("id", default_id))
    module = None
    keys = ["inf"] + [str(p) for p in cfg.primes]
    if "inf" in obj:
        missing = [k for k in keys if k not in obj]
        if missing:
            raise InstanceError(f"missing matrices for places {missing}")
        mats = {("inf" if k == "inf" else int(k)): _matrix(obj[k], n, k) for k in keys}
        module = SModule(cfg, SMatrix(cfg, mats))
    gens = gens_b = None
    if "generators" in obj:
        gens = [_place_vectors(cfg, g, n, "generators") for g in _list(obj["generators"], "generators")]
    if "generators_b" in obj:
        gens_b = [_place_vectors(cfg, g, n, "generators_b") for g in _list(obj["generators_b"], "generators_b")]
    box = None
    if "box" in obj:
        from .theorems import SBox

        b = obj["box"]
        if not isinstance(b, dict) or "arch" not in b:
            raise InstanceError("box needs an 'arch' list")
        try:
            box = SBox(_vector(b["arch"], n, "box.arch"),
                       {int(p): int(k) for p, k in b.get("nonarch", {}).items()})
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(f"box: {exc}") from exc
    targets = None
    if "targets" in obj:
        targets = []
        for t in _list(obj["targets"], "targets"):
            if not isinstance(t, dict):
                raise InstanceError("targets must be objects keyed by place")
            targets.append({("inf" if k == "inf" else int(k)): _vector(v, n, f"targets[{k}]") for k, v in t.items()})
    if module is None and gens is None:
        raise InstanceError("instance has neither generator matrices nor generators")
    return ParsedInstance(iid, cfg, n, module, gens, gens_b, box, targets, obj)


def _list(obj, where):
    if not isinstance(obj, list):
        raise InstanceError(f"{where} must be a list")
    return obj


def load_document(text: str) -> dict:
    """Parse a file into {"kind": "instance"|"family"|"suite", "items": [ParsedInstance]}."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InstanceError("top level must be an object")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise InstanceError(f"unsupported or missing schema_version {obj.get('schema_version')!r}")
    for kind, key in (("family", "family"), ("suite", "instances")):
        if key in obj:
            items = _list(obj[key], key)
            return {"kind": kind, "items": [parse_instance(o, f"{kind}-{i}") for i, o in enumerate(items)]}
    return {"kind": "instance", "items": [parse_instance(obj)]}


def instance_to_json(module: SModule, id: str = "instance", **extra) -> dict:
    """Instance object for a module with an explicit real matrix."""
    if module.g is None:
        raise ValueError("only modules with explicit generator matrices can be written")
    out = {"schema_version": SCHEMA_VERSION, "id": id, "primes": list(module.config.primes), "n": module.n}
    for pl in module.config.places:
        out[str(pl)] = [[fmt_rational(x) for x in r] for r in module.g[pl]]
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# values out


def encode(x):
    """JSON-ready form of library values."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return fmt_rational(x)
    if isinstance(x, Magnitude):
        d = {"value": fmt_rational(x.value), "sqrt": x.sqrt}
        if x.pi_exp:
            d["pi_exp"] = x.pi_exp
        return d
    if isinstance(x, SurdSum):
        return {"sum": [dict(encode(m), coeff=fmt_rational(c)) for c, m in x.parts]}
    if isinstance(x, ModulePoint):
        d = {"coeffs": [fmt_rational(c) for c in x.coeffs], "norm": encode(x.norm)}
        if x.value is not None:
            d["value"] = {str(pl): [fmt_rational(t) for t in v] for pl, v in x.value.per_place.items()}
        return d
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    raise TypeError(f"cannot encode {type(x).__name__}")


def decode_magnitude(d) -> Magnitude:
    return Magnitude(parse_rational(d["value"]), bool(d["sqrt"]), int(d.get("pi_exp", 0)))


def report_to_dict(rep) -> dict:
    return {
        "check": rep.check,
        "instance": rep.instance,
        "lower": encode(rep.lower),
        "middle": encode(rep.middle),
        "upper": encode(rep.upper),
        "pass": bool(rep.passed),
        "witnesses": encode(rep.witnesses),
        "constants": encode(rep.constants),
    }


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def display(x) -> str:
    """Exact human-readable text for a value (used in CSV cells)."""
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return fmt_rational(x)
    return str(x)


def rows_to_csv(rows: list, columns: list) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: r.get(c, "") for c in columns})
    return buf.getvalue()
