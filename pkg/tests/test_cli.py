import csv
import json

import jsonschema
import pytest

from gfekit.cli import main, read_config
from gfekit.report import Check, Report, load_schema, threshold_check


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    report = json.loads(out) if out.strip() else None
    if report is not None:
        jsonschema.validate(report, load_schema())
    return code, report, out, err


def checks(report):
    return {c["name"]: c for c in report["checks"]}


def test_verify_polynomial_is_proved(capsys):
    code, rep, _, err = invoke(capsys, "verify-solution", "--name", "polynomial", "--param", "c1=1", "--param", "c2=0",
                               "--beta", "1", "--mode", "symbolic")
    assert code == 0 and rep["passed"]
    assert [c["verdict"] for c in rep["checks"]] == ["proved"]
    assert "PASS" in err


def test_verify_harmonic_is_probable(capsys):
    code, rep, _, _ = invoke(capsys, "verify-solution", "--name", "harmonic", "--beta", "1", "--mode", "numeric",
                             "--box", "x=0.5:2,y=-0.4*x:0.4*x", "--seed", "1729")
    assert code == 0
    assert rep["checks"][0]["verdict"] == "probable"
    assert rep["checks"][0]["max_residual"] <= 1e-25
    assert rep["seed"] == 1729


def test_unknown_solution_is_a_usage_error(capsys):
    code, rep, _, err = invoke(capsys, "verify-solution", "--name", "nope")
    assert code == 2 and rep is None
    assert "unknown solution" in err


def test_missing_required_option(capsys):
    code, _, _, err = invoke(capsys, "verify-solution")
    assert code == 2 and "--name" in err


def test_bad_param_syntax(capsys):
    code, _, _, _ = invoke(capsys, "verify-solution", "--name", "rossby", "--param", "k1")
    assert code == 2


def test_example1_requires_c1(capsys):
    code, _, _, err = invoke(capsys, "verify-foliation", "--example", "1", "--param", "c1=0")
    assert code == 2 and "c1" in err


def test_same_seed_gives_identical_reports(capsys):
    argv = ("verify-solution", "--name", "harmonic", "--beta", "1", "--mode", "numeric", "--seed", "42")
    _, _, first, _ = invoke(capsys, *argv)
    _, _, second, _ = invoke(capsys, *argv)
    assert first == second
    _, _, other, _ = invoke(capsys, *argv[:-1], "43")
    assert other != first


def test_timings_are_opt_in(capsys):
    _, rep, _, _ = invoke(capsys, "verify-solution", "--name", "zonal", "--param", "F=sin(y)")
    assert rep["checks"][0]["wall_time"] is None
    _, rep, _, _ = invoke(capsys, "verify-solution", "--name", "zonal", "--param", "F=sin(y)", "--timings")
    assert rep["checks"][0]["wall_time"] >= 0


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# rossby defaults\nname = rossby\nparam.A = 1\nparam.k = 1\nbeta = 1\nseed = 7\n")
    assert read_config(str(cfg))["param"] == {"A": "1", "k": "1"}
    code, rep, _, _ = invoke(capsys, "verify-solution", "--config", str(cfg))
    assert code == 0 and rep["seed"] == 7
    code, rep, _, _ = invoke(capsys, "verify-solution", "--config", str(cfg), "--seed", "9", "--param", "k=2")
    assert rep["seed"] == 9
    assert rep["parameters"]["record"]["params"]["k"] == "2"


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, _, err = invoke(capsys, "verify-solution", "--name", "zonal", "--param", "F=y", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_report_written_to_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, rep, _, _ = invoke(capsys, "verify-solution", "--name", "zonal", "--param", "F=y^2", "--report", str(path))
    assert code == 0 and rep is None
    jsonschema.validate(json.loads(path.read_text()), load_schema())


def test_verify_foliation_example1(capsys):
    code, rep, _, _ = invoke(capsys, "verify-foliation", "--example", "1", "--param", "c1=1", "--param", "c2=0",
                             "--beta", "1", "--samples", "16")
    assert code == 0
    names = checks(rep)
    assert {f"resolving.R{i}" for i in range(1, 6)} <= set(names)
    assert names["route_consistency"]["max_residual"] <= 1e-8


def test_reconstruct_writes_table(capsys, tmp_path):
    out = tmp_path / "poly.tab"
    code, rep, _, _ = invoke(capsys, "reconstruct", "--name", "polynomial", "--param", "c1=1", "--param", "c2=0",
                             "--beta", "1", "--samples", "16", "--out", str(out))
    assert code == 0
    assert rep["outputs"] == [str(out)]
    assert out.read_text().splitlines()[0] == "t y h U V W Z"


def test_reconstruct_rossby_fails_with_witness(capsys):
    code, rep, _, err = invoke(capsys, "reconstruct", "--name", "rossby", "--param", "A=1", "--param", "k=1",
                               "--beta", "1", "--samples", "16")
    assert code == 1 and not rep["passed"]
    wd = checks(rep)["well_defined"]
    assert wd["verdict"] == "failed" and wd["witness"]["first"]
    assert "FAIL well_defined" in err


def test_reconstruct_needs_bound_parameters(capsys):
    code, _, _, _ = invoke(capsys, "reconstruct", "--name", "polynomial", "--param", "c1=1", "--param", "c2=0")
    assert code == 2


def test_short_simulation(capsys, tmp_path):
    code, rep, _, _ = invoke(capsys, "simulate", "--solution", "rossby", "--param", "k=1", "--param", "A=1",
                             "--beta", "1", "--N", "32", "--T", "0.5", "--dt", "0.01", "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.reader((tmp_path / "timeseries.csv").open()))
    assert rows[0] == ["time", "l2_error", "linf_error", "energy", "enstrophy"]
    assert set(checks(rep)) == {"final_linf_error", "enstrophy_drift", "energy_drift"}


def test_simulating_a_non_periodic_solution_is_a_usage_error(capsys):
    code, _, _, err = invoke(capsys, "simulate", "--solution", "polynomial", "--param", "c1=1", "--param", "c2=0",
                             "--beta", "1", "--N", "16", "--T", "0.1")
    assert code == 2 and "periodic" in err


def test_report_object():
    rep = Report("verify-solution", {"a": 1}, 3)
    rep.add(Check("x", "proved"))
    rep.add(threshold_check("y", 2e-9, 1e-8, None))
    assert rep.passed and rep.exit_code == 0
    with pytest.raises(ValueError):
        rep.add(Check("x", "proved"))
    rep.add(threshold_check("z", 1.0, 1e-8, {"where": 0}))
    assert rep.exit_code == 1
    jsonschema.validate(json.loads(rep.dumps()), load_schema())
