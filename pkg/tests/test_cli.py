import csv
import io
import json

import pytest

from sadic import io as sio
from sadic.cli import main
from sadic.exactnum import SConfig
from sadic.instances import diag_flow_family
from sadic.smodule import SModule


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def identity_doc(primes=(2,), n=2):
    return sio.instance_to_json(SModule.standard(SConfig(primes), n), "identity")


DIAG = {"schema_version": 1, "id": "diag", "primes": [], "n": 2, "inf": [["1/4", "0"], ["0", "4"]]}
RANK1 = {"schema_version": 1, "id": "rank1", "primes": [3], "n": 1, "inf": [["1/3"]], "3": [["1/3"]]}


def test_minima_examples(tmp_path, capsys):
    code, out, _ = run(capsys, "minima", write(tmp_path, "id.json", identity_doc((2, 3), 3)))
    assert code == 0
    res = json.loads(out)
    assert [m["value"] for m in res["minima"]] == ["1", "1", "1"]
    code, out, _ = run(capsys, "minima", write(tmp_path, "d.json", DIAG))
    assert [m["value"] for m in json.loads(out)["minima"]] == ["1/4", "4"]
    code, out, _ = run(capsys, "minima", write(tmp_path, "r.json", RANK1))
    res = json.loads(out)
    assert res["minima"][0] == {"value": "1", "sqrt": False}
    assert res["witnesses"][0]["coeffs"] == ["3"]


def test_minima_csv(tmp_path, capsys):
    code, out, _ = run(capsys, "minima", write(tmp_path, "d.json", DIAG), "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["minimum"] for r in rows] == ["1/4", "4"]
    assert rows[0]["witness"] == "1 0"


def test_cov_and_reduce(tmp_path, capsys):
    path = write(tmp_path, "d.json", DIAG)
    code, out, _ = run(capsys, "cov", path)
    assert code == 0 and json.loads(out)["covolume"]["value"] == "1"
    code, out, _ = run(capsys, "reduce", path)
    res = json.loads(out)
    assert code == 0 and res["pass"] and res["short_points"] == []


@pytest.mark.parametrize("check", ["precise", "minkowski", "covering", "sumcov", "boxpoint"])
def test_verify_golden(check, capsys):
    code, out, err = run(capsys, "verify", check)
    res = json.loads(out)
    assert code == 0, err
    assert res["failed"] == 0 and res["count"] > 0


def test_verify_corrupted_bound(capsys):
    code, out, err = run(capsys, "verify", "precise", "--corrupt-bound")
    assert code == 1
    dump = json.loads(err)
    assert dump["falsified"] and all(not r["pass"] for r in dump["falsified"])
    assert {"check", "instance", "lower", "middle", "upper", "witnesses"} <= set(dump["falsified"][0])


def test_input_errors(tmp_path, capsys):
    assert run(capsys, "minima", write(tmp_path, "bad.json", "{not json"))[0] == 2
    assert run(capsys, "minima", write(tmp_path, "v.json", dict(DIAG, schema_version=7)))[0] == 2
    assert run(capsys, "minima", write(tmp_path, "m.json", dict(DIAG, inf=[["1", "0"]])))[0] == 2
    assert run(capsys, "minima", write(tmp_path, "p.json", dict(DIAG, primes=[4])))[0] == 2
    assert run(capsys, "minima", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "probe", write(tmp_path, "f.json", {"schema_version": 1, "family": []}), "--eps", "1/4")[0] == 2
    assert run(capsys, "estimate-covering", write(tmp_path, "d.json", DIAG), "--samples", "3")[0] == 2
    assert run(capsys, "submodules", "--n", "2", "--bound", "1/2")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_domain_errors(tmp_path, capsys):
    sing = dict(DIAG, inf=[["1", "2"], ["2", "4"]])
    assert run(capsys, "minima", write(tmp_path, "s.json", sing))[0] == 3
    big = dict(DIAG, inf=[["1000000", "0"], ["0", "1"]])
    assert run(capsys, "minima", write(tmp_path, "b.json", big), "--iteration-cap", "2")[0] == 3


def _family_doc(modules):
    return {"schema_version": 1, "family": [
        {k: v for k, v in sio.instance_to_json(m, mid).items() if k != "schema_version"} for mid, m in modules]}


def test_probe_exit_codes(tmp_path, capsys):
    fam = _family_doc([(i.id, i.module) for i in diag_flow_family()])
    code, out, _ = run(capsys, "probe", write(tmp_path, "flow.json", fam), "--eps", "1/4")
    res = json.loads(out)
    assert code == 4
    assert [m["id"] for m in res["offending"]] == ["k=3", "k=4", "k=5", "k=6"]
    const = _family_doc([(f"c{i}", SModule.standard(SConfig((2,)), 2)) for i in range(3)])
    code, out, _ = run(capsys, "probe", write(tmp_path, "const.json", const), "--eps", "1/4")
    assert code == 0 and json.loads(out)["bounded_below"]


@pytest.mark.parametrize("bound,count", [("3", 5), ("1", 1), ("5", 11)])
def test_submodules_counts(bound, count, capsys):
    code, out, _ = run(capsys, "submodules", "--primes", "2", "--n", "2", "--bound", bound)
    res = json.loads(out)
    assert code == 0 and res["count"] == count == len(res["modules"])


def test_estimate_covering(tmp_path, capsys):
    path = write(tmp_path, "z2.json", dict(identity_doc((), 2), targets=[{"inf": ["1/2", "1/2"]}]))
    code, out, _ = run(capsys, "estimate-covering", path, "--samples", "4", "--seed", "3")
    res = json.loads(out)
    assert code == 0 and res["within"]
    assert res["estimate"] == {"value": "1/2", "sqrt": True}


def test_round_trip(tmp_path, capsys):
    path = write(tmp_path, "d.json", DIAG)
    code, out, _ = run(capsys, "minima", path)
    res = json.loads(out)
    for m in res["minima"]:
        assert sio.encode(sio.decode_magnitude(m)) == m
        assert sio.fmt_rational(sio.parse_rational(m["value"])) == m["value"]
    doc = sio.load_document(json.dumps(DIAG))["items"][0]
    again = sio.instance_to_json(doc.module, doc.id)
    assert again == DIAG


def test_out_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "cov", write(tmp_path, "d.json", DIAG), "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["instance"] == "diag"


def test_determinism_across_jobs(tmp_path, capsys):
    suite = {"schema_version": 1, "instances": [
        {k: v for k, v in sio.instance_to_json(i.module, i.id).items() if k != "schema_version"}
        for i in diag_flow_family(range(1, 5))]}
    path = write(tmp_path, "suite.json", suite)
    _, one_a, _ = run(capsys, "verify", "precise", path, "--jobs", "1")
    _, one_b, _ = run(capsys, "verify", "precise", path, "--jobs", "1")
    _, two, _ = run(capsys, "verify", "precise", path, "--jobs", "2")
    assert one_a == one_b
    assert json.loads(one_a) == json.loads(two)
