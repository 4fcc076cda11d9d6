import math

import orjson
import pandas as pd
import pytest
from typer.testing import CliRunner

from scripts.cli import app, parse_complex
from scripts.file_tools import read_report

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


def test_parse_complex_forms():
    assert parse_complex("1.5,-2") == complex(1.5, -2)
    assert parse_complex("1+2j") == complex(1, 2)
    assert parse_complex("-4") == -4
    assert parse_complex(3) == 3


def test_dedekind_report(tmp_path):
    out = tmp_path / "dedekind.json"
    result = invoke("auto", "--task", "dedekind", "--d", -4, "--s", "2", "--out", out)
    assert result.exit_code == 0, result.output
    record = read_report(str(out))
    assert record.subcommand == "auto"
    assert record.all_passed
    value = record.results["dedekind_zeta"]["via_heegner"]
    assert value["re"] == pytest.approx(1.5067030099229851, rel=1e-8)
    assert value["im"] == pytest.approx(0.0, abs=1e-12)
    assert record.parameters["d"] == -4


def test_forms_csv(tmp_path):
    csv = tmp_path / "forms.csv"
    result = invoke("auto", "--task", "forms", "--d", -23, "--csv", csv, "--out", tmp_path / "forms.json")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(csv)
    assert len(frame) == 3
    assert set(frame["d"]) == {-23}
    assert read_report(str(tmp_path / "forms.json")).results["class_number"] == 3


def test_numerical_failure_exits_one(tmp_path):
    out = tmp_path / "deuring.json"
    result = invoke("auto", "--task", "deuring", "--d", -23, "--out", out)
    assert result.exit_code == 1
    record = read_report(str(out))
    assert record.diagnostics
    assert record.diagnostics[0].startswith("deuring: DomainError")


def test_default_report_location(report_dir):
    result = invoke("auto", "--task", "phi", "--zp", "0.5,2")
    assert result.exit_code == 0, result.output
    files = [p.name for p in report_dir.iterdir()]
    assert len(files) == 1 and files[0].startswith("auto_")


def test_identical_runs_share_task_id(tmp_path):
    args = ("auto", "--task", "dedekind", "--d", -23, "--s", "3")
    assert invoke(*args, "--out", tmp_path / "a.json").exit_code == 0
    assert invoke(*args, "--out", tmp_path / "b.json").exit_code == 0
    first, second = read_report(str(tmp_path / "a.json")), read_report(str(tmp_path / "b.json"))
    assert first.task_id == second.task_id
    assert first.results == second.results


def test_tol_override_applies_to_every_check(tmp_path):
    out = tmp_path / "phi.json"
    result = invoke("auto", "--task", "phi", "--tol", 1e-300, "--out", out)
    assert result.exit_code == 1
    record = read_report(str(out))
    assert record.parameters["tol"] == 1e-300
    assert all(c.tol == 1e-300 for c in record.checks)
    assert not record.all_passed


@pytest.mark.parametrize(
    "args",
    [
        ("sl", "--potential", "2*(x"),
        ("sl", "--potential", "1/x"),
        ("sl", "--check", "spectrum"),
        ("auto", "--task", "nothing"),
        ("auto", "--y", -1),
        ("auto", "--s", "two"),
        ("qdiff", "--b", -1),
        ("schrod", "--potential", "x^2"),
        ("auto", "--tol", -1),
    ],
)
def test_usage_errors_exit_two(args):
    assert invoke(*args).exit_code == 2


def test_sl_free_determinant(tmp_path):
    out = tmp_path / "sl.json"
    result = invoke("sl", "--potential", "0", "--check", "determinant", "--out", out)
    assert result.exit_code == 0, result.output
    record = read_report(str(out))
    assert record.results["determinant"]["value"] == pytest.approx(2 * math.pi, rel=1e-8)
    assert {c.name for c in record.checks} == {"determinant-truncation", "determinant-free"}


def test_sl_eigenvalue_table(tmp_path):
    csv = tmp_path / "eig.csv"
    result = invoke("sl", "--potential", "3", "--check", "eigenvalues", "--nmax", 20, "--csv", csv,
                    "--out", tmp_path / "eig.json")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(csv)
    assert len(frame) == 20
    assert frame["eigenvalue"].iloc[0] == pytest.approx(4.0, rel=1e-9)


def test_schrod_zf_order_one(tmp_path):
    out = tmp_path / "zf.json"
    result = invoke("schrod", "--check", "zf", "--order", 1, "--out", out)
    assert result.exit_code == 0, result.output
    names = {c.name for c in read_report(str(out)).checks}
    assert names == {"zf-order-1", "zf-order-1-closed-form"}


def test_schrod_recognizes_rewritten_sech_well(tmp_path):
    out = tmp_path / "zf.json"
    result = invoke("schrod", "--potential", "-2*sech(x)*sech(x)", "--check", "zf", "--order", 1, "--out", out)
    assert result.exit_code == 0, result.output
    names = {c.name for c in read_report(str(out)).checks}
    assert names == {"zf-order-1", "zf-order-1-closed-form"}


def test_qdiff_dilog(tmp_path):
    out = tmp_path / "dilog.json"
    result = invoke("qdiff", "--b", 0.8, "--check", "dilog", "--out", out)
    assert result.exit_code == 0, result.output
    assert read_report(str(out)).parameters["b"] == 0.8


def test_config_file_supplies_flags(tmp_path):
    config = tmp_path / "cusp.json"
    config.write_bytes(orjson.dumps({"task": "cusp", "zp": "0,3"}))
    out = tmp_path / "cusp.json.out"
    result = invoke("auto", "--config", config, "--s", "2", "--out", out)
    assert result.exit_code == 0, result.output
    record = read_report(str(out))
    assert record.parameters["task"] == "cusp"
    assert record.parameters["zp"] == {"re": 0.0, "im": 3.0}


def test_command_line_beats_config_file(tmp_path):
    config = tmp_path / "run.json"
    config.write_bytes(orjson.dumps({"task": "dedekind", "d": -23}))
    out = tmp_path / "run.out.json"
    assert invoke("auto", "--config", config, "--d", -47, "--out", out).exit_code == 0
    assert read_report(str(out)).results["dedekind_zeta"]["class_number"] == 5


def test_config_file_with_unknown_key(tmp_path):
    config = tmp_path / "bad.json"
    config.write_bytes(orjson.dumps({"taks": "cusp"}))
    assert invoke("auto", "--config", config).exit_code == 2


def test_sl_gelfand_levitan(tmp_path):
    out = tmp_path / "r.json"
    result = invoke("sl", "--potential", "x^2", "--nmax", 100, "--check", "gelfand-levitan", "--out", out)
    assert result.exit_code == 0, result.output
    gl = read_report(str(out)).results["gelfand_levitan"]
    assert gl["rhs"] == pytest.approx(-math.pi**2 / 12, rel=1e-9)
    assert gl["lhs"] == pytest.approx(gl["rhs"], abs=1e-3)
