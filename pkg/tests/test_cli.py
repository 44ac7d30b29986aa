import csv
import io
import json
import os
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from jensen_cert import cli
from jensen_cert.jensen import DEFAULT_SEED

SCHEMA = json.loads(resources.files("jensen_cert").joinpath("schema/report.schema.json").read_text())


def run_json(capsys, *argv):
    code = cli.run([*argv, "--format", "json"])
    out = capsys.readouterr().out
    report = json.loads(out) if out else None
    if report is not None:
        jsonschema.validate(report, SCHEMA)
        assert report["exit_code"] == code
    return code, report, out


def test_default_seed_is_documented_constant():
    assert DEFAULT_SEED == 0xC0DE == 49374


# -------------------------------------------------------------------- hessian

def test_hessian_ex5(capsys):
    code, rep, _ = run_json(capsys, "hessian", "-f", "x^2/(x+y)", "-v", "x,y", "-p", "1,1")
    res = rep["results"]
    assert code == 0
    assert res["hessian"] == [[0.25, -0.25], [-0.25, 0.25]]
    assert res["class"] == "positive_semidefinite"
    assert abs(res["minors"][1]) < 1e-15


def test_hessian_norm_minors(capsys):
    code, rep, _ = run_json(capsys, "hessian", "-f", "sqrt(x^2+y^2+z^2)", "-v", "x,y,z", "-p", "1,1,1")
    assert code == 0
    assert rep["results"]["minors"][1] == pytest.approx(1 / 9, abs=1e-14)
    assert abs(rep["results"]["minors"][2]) < 1e-14


def test_hessian_text_output(capsys):
    assert cli.run(["hessian", "-f", "x*y", "-v", "x,y", "-p", "1,2"]) == 0
    assert "indefinite" in capsys.readouterr().out


def test_malformed_formula_exits_2_with_offset(capsys):
    assert cli.run(["hessian", "-f", "x +", "-v", "x", "-p", "1"]) == 2
    assert "offset 3" in capsys.readouterr().err


def test_domain_error_exits_3(capsys):
    assert cli.run(["hessian", "-f", "sqrt(x)", "-v", "x", "-p", "-1"]) == 3
    assert "sqrt" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    assert cli.run(["hessian", "-f", "x", "-p", "1"]) == 2
    assert cli.run(["check", "--corpus", "nope"]) == 2
    assert cli.run(["check", "-f", "x+y", "-v", "x,y", "--samples", "0"]) == 2
    with pytest.raises(SystemExit) as err:
        cli.run(["frobnicate"])
    assert err.value.code == 2


# ---------------------------------------------------------------------- check

def test_check_ex5_holds_ge(capsys):
    code, rep, _ = run_json(capsys, "check", "--corpus", "ex5", "--samples", "10000", "--seed", "7")
    res = rep["results"]
    assert code == 0
    assert res["verdict"] == "holds_ge"
    assert res["corpus"]["min_margin"] >= -1e-9
    assert res["violations"] == []


def test_check_ex2_holds_le(capsys):
    code, rep, _ = run_json(capsys, "check", "--corpus", "ex2", "--samples", "500")
    assert code == 0 and rep["results"]["verdict"] == "holds_le"


def test_check_linear_both_directions(capsys):
    code, rep, _ = run_json(capsys, "check", "-f", "x+y", "-v", "x,y", "--shape", "cyclic2", "--samples", "200")
    res = rep["results"]
    assert code == 0
    assert res["verdict"] == "holds_both"
    assert max(abs(res["min_scaled_gap"]), abs(res["max_scaled_gap"])) <= 1e-12


def test_check_explicit_triple(capsys):
    code, rep, _ = run_json(capsys, "check", "-f", "x^2+y^2", "-v", "x,y", "--points", "0,0;3,0;0,3")
    assert code == 0
    assert rep["results"]["report"]["centroid"] == [1.0, 1.0]
    assert rep["results"]["report"]["gap"] == pytest.approx(12.0)


def test_check_expect_failure_exits_4(capsys):
    code, _, _ = run_json(capsys, "check", "--corpus", "ex2", "--samples", "100", "--expect", "ge")
    assert code == 4


# ------------------------------------------------------------------ curvature

def test_curvature_hemisphere_grid(capsys):
    code, rep, _ = run_json(capsys, "curvature", "-f", "sqrt(1-u^2-v^2)", "--grid", "0.5")
    res = rep["results"]
    assert code == 0
    ok = [r for r in res["rows"] if r["status"] == "ok"]
    assert len(ok) == 9
    assert all(abs(r["K"] - 1) <= 1e-9 for r in ok)
    assert any(r["status"] == "domain_error" for r in res["rows"])


def test_curvature_plane_and_paraboloid(capsys):
    _, rep, _ = run_json(capsys, "curvature", "-f", "2*u - 3*v + 1", "--grid", "0.5")
    assert {r["K"] for r in rep["results"]["rows"]} == {0.0}
    _, rep, _ = run_json(capsys, "curvature", "-f", "(u^2+v^2)/2", "-p", "0,0")
    assert rep["results"]["rows"][0]["K"] == 1.0


def test_curvature_triple_agreement(capsys):
    code, rep, _ = run_json(capsys, "curvature", "--corpus", "ex2", "--triple", "1,2;2,3;3,1", "-p", "1,2")
    assert code == 0
    assert rep["results"]["agree"] is True
    assert rep["results"]["curvature_check"]["verdict"] == "holds_le"


def test_curvature_csv_layout(capsys):
    assert cli.run(["curvature", "-f", "u*v", "--grid", "1", "--format", "csv"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["u", "v", *cli.CURVATURE_FIELDS, "class", "status"]
    assert len(rows) == 1 + 9


def test_csv_only_for_curvature(capsys):
    assert cli.run(["hessian", "-f", "x", "-v", "x", "-p", "1", "--format", "csv"]) == 2


# --------------------------------------------------------------------- corpus

def test_corpus_ex1_c_minus_two(capsys):
    code, rep, _ = run_json(capsys, "corpus", "--only", "ex1", "--param", "c=-2", "--samples", "2000")
    checks = rep["results"]["entries"][0]["checks"]
    assert checks["margin"] == checks["equality"] == "pass"
    # the Hessian signature claim is refuted by sampling (see test_corpus)
    assert checks["signature"] == "fail"
    assert code == 4


def test_corpus_ex1_outside_range_is_unasserted(capsys):
    code, rep, _ = run_json(capsys, "corpus", "--only", "ex1", "--param", "c=0.5", "--samples", "500")
    assert code == 0
    assert set(rep["results"]["entries"][0]["checks"].values()) == {"unasserted"}


def test_corpus_other_entries_pass(capsys):
    argv = ["corpus", "--samples", "2000"]
    for eid in ("norm3", "ex2", "ex3", "ex4", "ex5"):
        argv += ["--only", eid]
    code, rep, _ = run_json(capsys, *argv)
    assert code == 0
    assert rep["results"]["all_passed"] is True


def test_corpus_manifest(capsys):
    assert cli.run(["corpus", "--manifest"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 6


def test_corpus_mixed_signs(capsys):
    code, rep, _ = run_json(capsys, "corpus", "--only", "ex5", "--mixed-signs", "--samples", "2000")
    assert code == 0
    assert rep["results"]["entries"][0]["inequality"]["mixed_signs"]["negative_branch"] > 0


# --------------------------------------------------------------------- search

def test_search_saddle_finds_violation(capsys):
    code, rep, _ = run_json(capsys, "search", "-f", "x*y", "-v", "x,y", "--claim", "ge", "--samples", "10000")
    res = rep["results"]
    assert code == 4
    assert res["first_violation"]["index"] < 10000
    assert res["reproduce"]["seed"] == DEFAULT_SEED


def test_search_convex_has_no_violation(capsys):
    code, rep, _ = run_json(capsys, "search", "-f", "x^2+y^2", "-v", "x,y", "--claim", "ge",
                            "--samples", "1000000", "--bounds=-10:10")
    assert code == 0 and rep["results"]["n_violations"] == 0


def test_search_concave_fails_immediately(capsys):
    code, rep, _ = run_json(capsys, "search", "--formula=-x^2", "-v", "x", "--claim", "ge", "--samples", "100")
    assert code == 4
    assert rep["results"]["first_violation"]["index"] <= 1


def test_search_violation_is_reproducible(capsys):
    _, rep, _ = run_json(capsys, "search", "-f", "x*y", "-v", "x,y", "--claim", "ge", "--samples", "5000",
                         "--seed", "3")
    fv = rep["results"]["first_violation"]
    from jensen_cert.expr import function
    from jensen_cert.jensen import jensen_gap
    assert jensen_gap(function("x*y", ["x", "y"]), fv["triple"]) == pytest.approx(fv["gap"])


# --------------------------------------------------------------- determinism

def test_json_is_byte_identical_across_runs_and_threads(capsys):
    argv = ["check", "--corpus", "ex3", "--samples", "5000", "--format", "json"]
    outs = []
    for threads in ("1", "1", "4"):
        cli.run([*argv, "--threads", threads])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] == outs[2]


def test_timing_is_opt_in(capsys):
    _, rep, _ = run_json(capsys, "hessian", "-f", "x", "-v", "x", "-p", "1", "--timing")
    assert rep["timing"]["seconds"] >= 0
    _, rep, _ = run_json(capsys, "hessian", "-f", "x", "-v", "x", "-p", "1")
    assert "timing" not in rep


def test_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.run(["hessian", "-f", "x^2", "-v", "x", "-p", "3", "--format", "json", "-o", str(out)]) == 0
    assert capsys.readouterr().out == ""
    jsonschema.validate(json.loads(out.read_text()), SCHEMA)


def test_console_entry_point_and_thread_env():
    env = dict(os.environ, JENSEN_CERT_THREADS="2")
    proc = subprocess.run(
        [sys.executable, "-m", "jensen_cert", "check", "--corpus", "ex5", "--samples", "300", "--format", "json"],
        capture_output=True, text=True, env=env, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    jsonschema.validate(json.loads(proc.stdout), SCHEMA)


def test_help_per_subcommand(capsys):
    for sub in ("hessian", "check", "curvature", "corpus", "search"):
        with pytest.raises(SystemExit) as err:
            cli.run([sub, "--help"])
        assert err.value.code == 0
    capsys.readouterr()
