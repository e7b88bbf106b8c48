import json

import pytest

from treetrace.cli import main
from treetrace.errors import InvalidLetter, ParseError, ValidationError
from treetrace.runner import RunReport, SuiteResult, rng_for, run
from treetrace.scenario import override_run, parse_scenario, parse_scenario_text, parse_word

S3_PERMS = {"permutations": [[1, 0, 2], [1, 2, 0]], "degree": 3}


def doc(**fields):
    return json.dumps(fields, indent=2)


def test_golden_amalgam_file(scenario_dir):
    sc = parse_scenario(scenario_dir / "s3_c2_s3.json")
    spec = sc.spec
    assert sc.kind == "amalgam"
    assert spec.A.order == spec.B.order == spec.H.order == 6 and spec.U.order == 2
    assert sc.run.trials == 500 and sc.run.max_support == 8 and sc.run.max_word_length == 4
    assert set(sc.letters) == {"s", "r", "S", "R"}


def test_hnn_file(scenario_dir):
    sc = parse_scenario(scenario_dir / "hnn_s3_c3.json")
    assert sc.spec.U.order == 3
    assert sc.spec.conjugator == sc.spec.H.index_of([1, 0, 2])


def test_minimal_loop(scenario_dir):
    sc = parse_scenario(scenario_dir / "hnn_c2_loop.json")
    assert sc.spec.H.order == 2 and sc.spec.U.order == 2
    # G = C2 x Z: t commutes with x
    x, t = sc.letters["x"], sc.letters["t"]
    assert sc.spec.normalize([t, x]) == sc.spec.normalize([x, t])


def test_synthetic_file(scenario_dir):
    sc = parse_scenario(scenario_dir / "index_c2_c3_s3.json")
    assert sc.spec is None
    assert [H.order for H in sc.index_groups] == [2, 3, 6]


def test_non_injective_alpha():
    # sign map of S3 onto the subgroup {e, (0 1)}; agrees with the identity on U
    sign = [[0, 1, 2], [1, 0, 2], [0, 1, 2], [1, 0, 2], [1, 0, 2], [0, 1, 2]]
    text = doc(kind="amalgam", A=S3_PERMS, U={"generators": [[1, 0, 2]]}, alpha_B=sign)
    with pytest.raises(ValidationError, match="alpha not injective on vertex group B") as info:
        parse_scenario_text(text)
    a, b = info.value.witness
    assert a != b


def test_wrong_conjugator_phi():
    text = doc(kind="hnn", H=S3_PERMS, U={"generators": [[1, 2, 0]]}, conjugator=[1, 0, 2],
               phi=[[[1, 2, 0], [1, 2, 0]], [[2, 0, 1], [2, 0, 1]]])
    with pytest.raises(ValidationError):
        parse_scenario_text(text)


def test_bad_group_table():
    with pytest.raises(Exception) as info:
        parse_scenario_text(doc(kind="hnn", H={"table": [[0, 1], [1, 1]]}, U={"generators": []}, conjugator=0))
    assert "inverse" in str(info.value)


def test_parse_error_has_line():
    text = '{\n  "kind": "hnn",\n  "H": [1,,]\n}\n'
    with pytest.raises(ParseError) as info:
        parse_scenario_text(text)
    assert info.value.line == 3


def test_schema_violation():
    with pytest.raises(ValidationError, match="schema"):
        parse_scenario_text(doc(kind="amalgam", A=S3_PERMS, U={"generators": []}, extra=1))
    with pytest.raises(ValidationError, match="radius"):
        parse_scenario_text(doc(kind="hnn", H=S3_PERMS, U={"generators": []}, conjugator=0, run={"radius": 99}))


def test_not_utf8(tmp_path):
    p = tmp_path / "bad.json"
    p.write_bytes(b'{"kind": "\xff"}')
    with pytest.raises(ParseError):
        parse_scenario(p)


def test_parse_word(scenario_dir):
    sc = parse_scenario(scenario_dir / "hnn_s3_c3.json")
    spec = sc.spec
    w = parse_word(sc, "t s t^-1 r^2 H:0")
    assert spec.normalize(w) == spec.normalize([("t", 1), sc.letters["s"], ("t", -1), sc.letters["r"], sc.letters["r"]])
    assert spec.normalize(parse_word(sc, "t T")).is_identity()
    with pytest.raises(InvalidLetter):
        parse_word(sc, "q")


def test_run_empty_suites(scenario_dir):
    rep = run(parse_scenario(scenario_dir / "s3_c2_s3.json"), [])
    assert rep.suites == {} and rep.exit_code == 0


def test_run_is_deterministic(scenario_dir):
    sc = override_run(parse_scenario(scenario_dir / "hnn_s3_c3.json"), trials=15, jv_samples=15, poly_trials=5,
                      cyclicity_trials=5, index_pairs=5, norm_trials=5)
    a, b = run(sc), run(sc)
    assert a.dumps(timing=False) == b.dumps(timing=False)
    assert a.exit_code == 0
    assert run(override_run(sc, seed=sc.run.seed + 1)).dumps(timing=False) != a.dumps(timing=False)


def test_prng_streams_are_independent():
    x = rng_for(1, "transfer", 0).integers(1 << 30, size=4)
    assert (x == rng_for(1, "transfer", 0).integers(1 << 30, size=4)).all()
    assert not (x == rng_for(1, "jv", 0).integers(1 << 30, size=4)).all()
    assert not (x == rng_for(1, "transfer", 1).integers(1 << 30, size=4)).all()


def test_exit_code_contract():
    ok, bad, budget = SuiteResult("a"), SuiteResult("b"), SuiteResult("c")
    bad.record(False, {"trial": 0})
    budget.passed, budget.error, budget.budget_exceeded = False, "too big", True
    assert RunReport({}, 0, {"a": ok}).exit_code == 0
    assert RunReport({}, 0, {"a": ok, "b": bad, "c": budget}).exit_code == 1
    assert RunReport({}, 0, {"a": ok, "c": budget}).exit_code == 3
    assert RunReport({}, 0, {"b": bad}).to_json()["suites"]["b"]["counterexamples"] == [{"trial": 0}]


def cli(capsys, *args):
    code = main(list(map(str, args)))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_verify_json(capsys, scenario_dir, tmp_path):
    f = scenario_dir / "s3_c2_s3.json"
    report = tmp_path / "r.json"
    code, out, _ = cli(capsys, "verify", "--scenario", f, "--suites", "transfer,jv", "--trials", 10,
                       "--format", "json", "--no-timing", "--report", report)
    assert code == 0
    data = json.loads(out)
    assert data["passed"] and sorted(data["suites"]) == ["jv", "transfer"]
    assert report.read_text() == out
    assert "ms" not in out
    code, out2, _ = cli(capsys, "verify", "--scenario", f, "--suites", "transfer,jv", "--trials", 10,
                        "--format", "json", "--no-timing")
    assert out2 == out


def test_cli_verify_text(capsys, scenario_dir):
    code, out, _ = cli(capsys, "verify", "--scenario", scenario_dir / "index_c2_c3_s3.json", "--trials", 3)
    assert code == 0
    assert "PASS index" in out and "PASS norms" in out


def test_cli_budget_exit(capsys, scenario_dir, tmp_path):
    data = json.loads((scenario_dir / "hnn_s3_c3.json").read_text())
    data["run"]["ball_budget"] = 10
    f = tmp_path / "small.json"
    f.write_text(json.dumps(data))
    code, out, _ = cli(capsys, "verify", "--scenario", f, "--suites", "transfer", "--trials", 2)
    assert code == 3
    assert "FAIL transfer" in out


def test_cli_input_errors(capsys, scenario_dir, tmp_path):
    assert cli(capsys, "verify", "--scenario", tmp_path / "missing.json")[0] == 2
    assert cli(capsys, "verify", "--scenario", scenario_dir / "s3_c2_s3.json", "--suites", "bogus")[0] == 2
    assert cli(capsys, "verify", "--scenario", scenario_dir / "index_c2_c3_s3.json", "--suites", "jv")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  nope\n}")
    code, _, err = cli(capsys, "verify", "--scenario", bad)
    assert code == 2 and "line 2" in err
    assert cli(capsys, "compute-trace", "--scenario", scenario_dir / "hnn_s3_c3.json", "--element", "zz")[0] == 2
    assert cli(capsys)[0] == 2


def test_cli_export_ball(capsys, scenario_dir):
    code, out, _ = cli(capsys, "export-ball", "--scenario", scenario_dir / "hnn_c2_loop.json", "--radius", 2, "--format", "dot")
    assert code == 0 and out.startswith("graph ball {") and out.count(" -- ") == 4
    code, out, _ = cli(capsys, "export-ball", "--scenario", scenario_dir / "s3_c2_s3.json", "--radius", 1)
    assert code == 0 and out.count("\nvertex ") == 4


def test_cli_compute_trace(capsys, scenario_dir):
    f = scenario_dir / "hnn_s3_c3.json"
    code, out, _ = cli(capsys, "compute-trace", "--scenario", f, "--element", "t r T", "--no-timing")
    rep = json.loads(out)
    assert code == 0
    assert rep["equal"] and rep["lhs"] == rep["rhs"] == "0+0*i"
    code, out, _ = cli(capsys, "compute-trace", "--scenario", f, "--element", "t T", "--no-timing")
    assert json.loads(out)["lhs"] == "1+0*i"
    code, out, _ = cli(capsys, "compute-trace", "--scenario", f, "--element", "r", "--basepoint", "t s")
    assert code == 0 and json.loads(out)["equal"]
