import math

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from scripts.file_tools import cleanup_reports, dumps_report, ls_reports, read_report, run_id, write_csv, write_report
from scripts.lab_utils import check
from scripts.numkit import DomainError
from scripts.report import ReportBuilder, render_summary
from scripts.schema import CheckRecord, ComplexValue, Subcommand, to_jsonable


def _record(runtime=0.0):
    builder = ReportBuilder(Subcommand.AUTO, {"task": "dedekind", "d": -4, "s": 2 + 0j})
    builder.add_result("value", 1.5067030099229853 + 0j)
    builder.add_result("array", np.array([1.0, 2.0]))
    builder.add_checks(check("two-routes", 1.0, 1.0 + 1e-12, 1e-9))
    return builder.build(runtime=runtime)


def test_check_pass_flag_is_derived():
    assert check("ok", 1.0, 1.0 + 1e-10, 1e-9).passed
    assert not check("bad", 1.0, 1.1, 1e-9).passed
    rec = check("own-residual", 0.0, 0.0, 1e-9, abs_err=1.0)
    assert not rec.passed


def test_check_inconsistent_pass_flag_rejected():
    with pytest.raises(ValidationError):
        CheckRecord(name="x", lhs=ComplexValue(re=0), rhs=ComplexValue(re=1), abs_err=1.0, tol=0.1, passed=True)


def test_non_finite_side_fails_without_crashing():
    rec = check("nan", float("nan"), 1.0, 1e-9)
    assert not rec.passed
    assert rec.abs_err is None
    assert "non-finite" in rec.note


def test_to_jsonable():
    assert to_jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}
    assert to_jsonable(np.float64(math.inf)) is None
    assert to_jsonable((np.int64(3), np.bool_(True))) == [3, True]
    assert to_jsonable(Subcommand.SL) == "sl"


def test_round_trip_is_lossless(report_dir):
    record = _record()
    path = write_report(record, base_dir=str(report_dir))
    assert path.endswith(f"{record.task_id}.json")
    again = read_report(path)
    assert again == record
    assert dumps_report(again) == dumps_report(record)


def test_identical_runs_give_identical_bytes():
    assert dumps_report(_record()) == dumps_report(_record())
    assert run_id("auto", {"d": -4, "s": 2}) == run_id("auto", {"s": 2, "d": -4})


def test_all_passed_requires_no_diagnostics():
    builder = ReportBuilder(Subcommand.SL, {})
    builder.add_checks(check("ok", 0.0, 0.0, 1e-9))
    with builder.guard("step"):
        raise DomainError("outside")
    record = builder.build(runtime=0.0)
    assert record.diagnostics == ["step: DomainError: outside"]
    assert not record.all_passed


def test_guard_lets_other_errors_through():
    builder = ReportBuilder(Subcommand.SL, {})
    with pytest.raises(ZeroDivisionError):
        with builder.guard("step"):
            1 / 0


def test_render_summary():
    text = render_summary(_record())
    assert "AUTO" in text
    assert "[PASS] two-routes" in text
    assert "1.50670300992+0i" in text


def test_csv_keeps_full_precision(report_dir):
    path = write_csv([{"x": 1 / 3, "y": 2}], "table.csv", base_dir=str(report_dir))
    frame = pd.read_csv(path)
    assert frame["x"][0] == 1 / 3
    assert ls_reports(base_dir=str(report_dir)) == ["table.csv"]
    assert cleanup_reports(base_dir=str(report_dir)) == ["table.csv"]
    assert ls_reports(base_dir=str(report_dir)) == []
