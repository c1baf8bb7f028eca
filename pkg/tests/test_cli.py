import json

import pytest

from qfa.cli import main
from qfa.core import GroupSpec, write_subset, GroupSubset
from qfa.setspec import SetSpecError, parse_set_spec
from qfa.suites import emit_report, run_suite


def test_parse_gs():
    A = parse_set_spec("gs:p=3,n=4")
    assert len(A) == 40


def test_parse_quadric():
    A = parse_set_spec("quadric:p=3,n=3,c=0")
    assert len(A) == 9


def test_parse_sparse_and_qgs():
    assert len(parse_set_spec("sparse:p=3,n=4")) == 3
    A = parse_set_spec("qgs:p=3,n=4")
    assert 0 < len(A) < 81


def test_parse_union_cosets():
    A = parse_set_spec("union-cosets:p=3,n=3,duals=100,reps=000;100")
    assert len(A) == 18


def test_parse_file(tmp_path):
    spec = GroupSpec(3, 2)
    A = GroupSubset.from_members(spec, [[1, 0], [0, 2]])
    path = tmp_path / "s.txt"
    write_subset(A, str(path))
    back = parse_set_spec(f"file:{path}")
    assert len(back) == 2


def test_parse_errors_have_positions():
    with pytest.raises(SetSpecError):
        parse_set_spec("nosuch:p=3,n=2")
    with pytest.raises(SetSpecError):
        parse_set_spec("gs:p=3")
    with pytest.raises(SetSpecError):
        parse_set_spec("gs:p3,n=2")


def test_suite_report_json_roundtrip():
    r = run_suite("quadric")
    blob = emit_report(r, "json")
    doc = json.loads(blob)
    assert doc["suite"] == "quadric"
    assert doc["verdict"] == "PASS"
    assert {c["id"] for c in doc["checks"]} == {
        "quadric-cap2",
        "quadric-no-2fop2",
        "quadric-vc2",
        "quadric-size",
    }
    for c in doc["checks"]:
        assert {"id", "anchor", "status", "measured", "bound", "witness", "runtime_ms"} <= set(c)


def test_suite_replayability():
    r1 = run_suite("quadric", {"seed": 7})
    r2 = run_suite("quadric", dict(r1.config))
    assert [c["status"] for c in r1.checks] == [c["status"] for c in r2.checks]
    assert [c["measured"] for c in r1.checks] == [c["measured"] for c in r2.checks]


def test_unknown_suite_raises():
    with pytest.raises(KeyError):
        run_suite("bogus")


def test_cli_verify_exit_code(tmp_path, capsys):
    out = tmp_path / "report.json"
    rc = main(["verify", "--suite", "quadric", "--json", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "PASS"
    text = capsys.readouterr().out
    assert "quadric-cap2" in text


def test_cli_detect_witness(capsys):
    rc = main(["detect", "hop2", "--set", "gs:p=3,n=4", "--k", "3", "--witness"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "witness"
    assert doc["witness"]["kind"] == "HOP2"


def test_cli_detect_none(capsys):
    rc = main(["detect", "hop2", "--set", "quadric:p=3,n=2,c=0", "--k", "2"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "none"


def test_cli_usage_error_exit_2(capsys):
    rc = main(["detect", "op", "--set", "nosuch:p=3", "--k", "2"])
    assert rc == 2


def test_cli_concurrent_jobs_match_serial():
    r1 = run_suite("quadric", jobs=1)
    r2 = run_suite("quadric", jobs=4)
    assert [c["id"] for c in r1.checks] == [c["id"] for c in r2.checks]
    assert [c["status"] for c in r1.checks] == [c["status"] for c in r2.checks]


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "qfa.cfg"
    cfg.write_text("seed=12\n")
    rc = main(["--config", str(cfg), "verify", "--suite", "quadric"])
    assert rc == 0


def test_cli_regularize_and_chain(tmp_path, capsys):
    chain = tmp_path / "chain.json"
    rc = main([
        "regularize", "--set", "gs:p=3,n=6", "--eps", "0.1",
        "--max-codim", "4", "--emit-chain", str(chain),
    ])
    assert rc == 0
    doc = json.loads(chain.read_text())
    assert doc["eps"] == 0.1 and len(doc["factors"]) >= 1


def test_cli_measure_u2(capsys):
    rc = main(["measure", "u2", "--set", "quadric:p=3,n=3,c=0"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["name"] == "u2" and doc["measured"] > 0


def test_report_verdicts_on_synthetic_results():
    from qfa.suites import CheckResult, SuiteResult

    empty = SuiteResult("synthetic", {})
    assert empty.verdict == "PASS"
    assert json.loads(emit_report(empty, "json"))["checks"] == []
    failing = SuiteResult("synthetic", {})
    failing.add("a", "slug", CheckResult("PASS"), 1.0)
    failing.add("b", "slug", CheckResult("FAIL", measured=2.0, bound=1.0), 1.0)
    assert failing.verdict == "FAIL"
    text = emit_report(failing, "text").decode()
    assert "[FAIL]" in text


def test_cli_detect_tree_counts(capsys):
    rc = main(["detect", "tree", "--set", "quadric:p=3,n=2,c=0", "--k", "1"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "tree" and int(doc["count"]) >= 0


def test_cli_factor_pullback(tmp_path, capsys):
    import numpy as np
    from qfa.core import GroupSpec
    from qfa.constructions import trace_sym_space
    from qfa.factors import LinearFactor, QuadraticFactor, write_factor

    sp = GroupSpec(3, 4)
    mats = trace_sym_space(4, 3)
    B = QuadraticFactor(sp, [sp.basis_vector(1)], [mats[0]])
    bfile = tmp_path / "b.txt"
    write_factor(B, str(bfile))
    lab = GroupSpec(3, 2)
    R = QuadraticFactor(lab, LinearFactor(lab, [np.array([1, 1])]), [])
    rfile = tmp_path / "r.txt"
    write_factor(R, str(rfile))
    out = tmp_path / "out.txt"
    rc = main([
        "factor", "pullback", "--factor", str(bfile),
        "--pullback", str(rfile), "--out", str(out),
    ])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["complexity"][1] > 0 or doc["purely_linear"]


def test_cli_measure_triad_quantities(tmp_path, capsys):
    import numpy as np
    from qfa.core import GroupSpec
    from qfa.constructions import trace_sym_space
    from qfa.factors import QuadraticFactor, write_factor

    sp = GroupSpec(3, 4)
    mats = trace_sym_space(4, 3)
    F = QuadraticFactor(sp, [], [mats[0]])
    ffile = tmp_path / "f.txt"
    write_factor(F, str(ffile))
    tfile = tmp_path / "t.json"
    tfile.write_text(json.dumps([0, 1, 2, 0, 1, 2]))
    for quantity in ("dev23", "oct", "k222"):
        rc = main([
            "measure", quantity, "--set", "gs:p=3,n=4",
            "--factor", str(ffile), "--triad", str(tfile),
        ])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["name"] == quantity


def test_parse_quadric_custom_matrix():
    from qfa.setspec import parse_set_spec

    A = parse_set_spec("quadric:p=3,n=2,c=1,m=01;10")
    # x^T M x = 2 x1 x2 = 1 has solutions (1,2),(2,1) over F_3
    assert len(A) == 2
