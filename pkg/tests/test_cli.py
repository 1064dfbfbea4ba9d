import json
import os

import pytest

from zerosum import serialize
from zerosum.cli import main
from zerosum.generators import fiber_union, random_cloud
from zerosum.group import GroupParams


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def write_instance(tmp_path, X, name="X.json"):
    path = tmp_path / name
    path.write_text(serialize.dumps(serialize.instance_to_json(X)))
    return str(path)


def test_olson_small(capsys):
    code, out = run_cli(capsys, "olson", "--p", "3", "--d", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["olson"] == 2 and rep["result"]["exact"]
    assert rep["timings"] is None

    code, out = run_cli(capsys, "olson", "--p", "5", "--d", "1")
    assert json.loads(out)["result"]["olson"] == 3


def test_olson_budget_interval(capsys):
    # large state space with a tiny node budget: interval answer, exact False
    code, out = run_cli(capsys, "olson", "--p", "101", "--d", "2", "--budget-ms", "200")
    assert code == 0
    res = json.loads(out)["result"]
    if not res["exact"]:
        assert res["olson"] is None
        assert res["lower"] <= res["upper"] == 2 * 100 + 1


def test_gen_pipeline_verify_roundtrip(tmp_path, capsys):
    xpath = str(tmp_path / "X.json")
    code, _ = run_cli(
        capsys, "gen", "--kind", "fiber-union", "--p", "31", "--d", "2",
        "--n-fibers", "5", "--offset", "1", "--seed", "0", "--output", xpath,
    )
    assert code == 0
    tpath = str(tmp_path / "trace.json")
    code, out = run_cli(capsys, "pipeline", "--input", xpath, "--seed", "5", "--trace", tpath)
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["status"] == "certificate"

    code, out = run_cli(capsys, "verify", "--input", tpath)
    assert code == 0
    assert json.loads(out)["result"]["all_passed"]

    # tampering with the certificate subset must fail verification
    blob = json.loads(open(tpath).read())
    blob["trace"]["result"]["subset"][0][1] = 2  # double one multiplicity
    bad = str(tmp_path / "tampered.json")
    open(bad, "w").write(json.dumps(blob))
    code, out = run_cli(capsys, "verify", "--input", bad)
    assert code == 2
    checks = {c["name"]: c["passed"] for c in json.loads(out)["result"]["checks"]}
    assert not checks["certificate"]


def test_pipeline_exit_codes(tmp_path, capsys):
    small = random_cloud(GroupParams(31, 2), 8, seed=2)
    xpath = write_instance(tmp_path, small)
    code, out = run_cli(capsys, "pipeline", "--input", xpath, "--seed", "0")
    assert code == 2
    failure = json.loads(out)["result"]["failure"]
    assert failure["inequality"]["name"] == "weight_sum_hypothesis"

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = run_cli(capsys, "pipeline", "--input", str(bad))
    assert code == 1

    code, _ = run_cli(capsys, "pipeline")  # missing required --input
    assert code == 1


def test_find_zero_sum_and_subsums(tmp_path, capsys):
    X = random_cloud(GroupParams(11, 2), 30, seed=4)
    xpath = write_instance(tmp_path, X)
    code, out = run_cli(capsys, "subsums", "--input", xpath)
    assert code == 0
    res = json.loads(out)["result"]
    assert res["reachable"] >= 1 and isinstance(res["bitset_le_b64"], str)

    code, out = run_cli(capsys, "find-zero-sum", "--input", xpath)
    assert code == 0
    payload = json.loads(out)["result"]
    if payload["status"] == "certificate":
        code, out = run_cli(
            capsys, "verify", "--input",
            _write_json(tmp_path, payload["certificate"], "cert.json"),
        )
        assert code == 0 and json.loads(out)["result"]["all_passed"]


def _write_json(tmp_path, obj, name):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_nul_command(capsys):
    code, out = run_cli(
        capsys, "nul", "--p", "5", "--d", "1", "--points", "1;2", "--weights", "5,5", "--r", "1"
    )
    assert code == 0
    res = json.loads(out)["result"]
    assert res["status"] == "solution"
    a1, a2 = res["coefficients"]
    assert (a1 + 2 * a2) % 5 == 0


def test_decompose_tube_artifacts_verify(tmp_path, capsys):
    X = fiber_union(GroupParams(31, 2), 2, seed=0, offset=0)
    xpath = write_instance(tmp_path, X)
    code, out = run_cli(capsys, "decompose", "--input", xpath, "--epsilon", "1/2", "--growth", "K+1")
    assert code == 0
    dec_artifact = json.loads(out)["result"]
    code, out = run_cli(
        capsys, "verify", "--input", _write_json(tmp_path, dec_artifact, "dec.json")
    )
    assert code == 0 and json.loads(out)["result"]["all_passed"]

    code, out = run_cli(capsys, "tube", "--input", xpath, "--growth", "K+1")
    assert code == 0
    tube_artifact = json.loads(out)["result"]["certificate"]
    code, out = run_cli(
        capsys, "verify", "--input", _write_json(tmp_path, tube_artifact, "tube.json")
    )
    assert code == 0 and json.loads(out)["result"]["all_passed"]


def test_expand_command(tmp_path, capsys):
    params = GroupParams(11, 1)
    fibers_payload = {
        "p": 11,
        "d": 1,
        "l": 0,
        "fibers": [
            {"label": [], "entries": [{"element": [i], "multiplicity": 1} for i in range(11)]}
        ],
    }
    fpath = _write_json(tmp_path, fibers_payload, "fibers.json")
    code, out = run_cli(capsys, "expand", "--input", fpath, "--seed", "1")
    assert code == 0
    cover_artifact = json.loads(out)["result"]["cover"]
    code, out = run_cli(
        capsys, "verify", "--input", _write_json(tmp_path, cover_artifact, "cover.json")
    )
    assert code == 0 and json.loads(out)["result"]["all_passed"]


def test_bench_empty_suite(capsys):
    code, out = run_cli(capsys, "bench", "--suite", "none")
    assert code == 0
    assert out.strip() == "suite,name,p,d,n,seconds"


def test_gen_determinism(tmp_path, capsys):
    args = ["gen", "--kind", "random-cloud", "--p", "13", "--d", "2", "--size", "20", "--seed", "9"]
    _, out1 = run_cli(capsys, *args)
    _, out2 = run_cli(capsys, *args)
    assert out1 == out2


def test_report_embeds_seed_and_version(capsys):
    code, out = run_cli(capsys, "olson", "--p", "3", "--d", "1", "--seed", "17")
    rep = json.loads(out)
    assert rep["seed"] == 17
    assert rep["artifact_version"]
    assert rep["schema_version"] == 1


def test_verify_failure_trace_and_tamper(tmp_path, capsys):
    small = random_cloud(GroupParams(31, 2), 8, seed=2)
    xpath = write_instance(tmp_path, small)
    tpath = str(tmp_path / "fail_trace.json")
    code, _ = run_cli(capsys, "pipeline", "--input", xpath, "--seed", "0", "--trace", tpath)
    assert code == 2
    code, out = run_cli(capsys, "verify", "--input", tpath)
    assert code == 0 and json.loads(out)["result"]["all_passed"]

    # tamper: pretend the violated inequality held after all
    blob = json.loads(open(tpath).read())
    for stage in blob["trace"]["stages"]:
        if stage.get("outcome") == "failure":
            stage["inequality"]["lhs"] = stage["inequality"]["rhs"]
    bad = str(tmp_path / "bad_trace.json")
    open(bad, "w").write(json.dumps(blob))
    code, out = run_cli(capsys, "verify", "--input", bad)
    assert code == 2
    names = {c["name"]: c["passed"] for c in json.loads(out)["result"]["checks"]}
    assert any("failure_re_violates" in n and not ok for n, ok in names.items())
