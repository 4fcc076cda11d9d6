"""
Report Assembly
Turns check records and named results into a ReportRecord and a plain-text
summary for the terminal or a log file.
"""

import time
from contextlib import contextmanager
from typing import Any, Iterator, Optional

import structlog

from scripts.file_tools import run_id
from scripts.numkit import LabError
from scripts.schema import CheckRecord, ReportRecord, Subcommand

log = structlog.get_logger(__name__)


class ReportBuilder:
    """
    Collects results, checks and diagnostics for one subcommand run.

    The task id is derived from the parameters only, so two identical
    invocations produce the same id and (apart from runtime) the same JSON.
    """

    def __init__(self, subcommand: Subcommand, parameters: dict[str, Any], tol_override: Optional[float] = None):
        self.subcommand = Subcommand(subcommand)
        self.parameters = dict(parameters)
        self.results: dict[str, Any] = {}
        self.checks: list[CheckRecord] = []
        self.diagnostics: list[str] = []
        self.tol_override = tol_override
        self._started = time.perf_counter()

    def add_result(self, name: str, value: Any) -> None:
        self.results[name] = value

    def add_checks(self, *checks: CheckRecord) -> None:
        if self.tol_override is not None:
            # --tol replaces the tolerance of every check; passed is re-derived
            checks = tuple(
                CheckRecord.model_validate({**rec.model_dump(exclude={"passed"}), "tol": self.tol_override})
                for rec in checks
            )
        self.checks.extend(checks)
        for rec in checks:
            log.info("check", name=rec.name, abs_err=rec.abs_err, tol=rec.tol, passed=rec.passed)

    def add_diagnostic(self, message: str) -> None:
        log.warning("diagnostic", message=message)
        self.diagnostics.append(message)

    @contextmanager
    def guard(self, step: str) -> Iterator[None]:
        """Record a LabError raised inside the block as a diagnostic and keep going."""
        try:
            yield
        except LabError as e:
            self.add_diagnostic(f"{step}: {type(e).__name__}: {e}")

    def build(self, runtime: Optional[float] = None) -> ReportRecord:
        elapsed = time.perf_counter() - self._started if runtime is None else runtime
        return ReportRecord(
            task_id=run_id(self.subcommand.value, self.parameters),
            subcommand=self.subcommand,
            parameters=self.parameters,
            results=self.results,
            checks=self.checks,
            diagnostics=self.diagnostics,
            runtime=round(elapsed, 6),
        )


def render_summary(record: ReportRecord) -> str:
    """Plain-text summary of a report."""
    parts = []

    # Header
    parts.append("=" * 60)
    parts.append(f"SPECTRAL LAB REPORT: {str(record.subcommand).upper()}  [{record.task_id}]")
    parts.append("=" * 60)
    parts.append("")

    if record.parameters:
        parts.append("PARAMETERS")
        parts.append("-" * 60)
        for key, value in sorted(record.parameters.items()):
            parts.append(f"{key}: {_short(value)}")
        parts.append("")

    if record.results:
        parts.append("RESULTS")
        parts.append("-" * 60)
        for key, value in sorted(record.results.items()):
            parts.append(f"{key}: {_short(value)}")
        parts.append("")

    if record.checks:
        passed = sum(rec.passed for rec in record.checks)
        parts.append(f"CHECKS ({passed}/{len(record.checks)} passed)")
        parts.append("-" * 60)
        for rec in record.checks:
            err = "n/a" if rec.abs_err is None else f"{rec.abs_err:.2e}"
            mark = "PASS" if rec.passed else "FAIL"
            parts.append(f"  [{mark}] {rec.name}: err {err} (tol {rec.tol:.0e})")
            if rec.note:
                parts.append(f"         {rec.note}")
        parts.append("")

    if record.diagnostics:
        parts.append("DIAGNOSTICS")
        parts.append("-" * 60)
        for message in record.diagnostics:
            parts.append(f"  - {message}")
        parts.append("")

    parts.append(f"Runtime: {record.runtime:.2f} s")
    parts.append("=" * 60)
    return "\n".join(parts)


def _short(value: Any, limit: int = 8) -> str:
    if isinstance(value, dict) and set(value) == {"re", "im"} and None not in value.values():
        return f"{value['re']:.12g}{value['im']:+.12g}i"
    if isinstance(value, list) and len(value) > limit:
        head = ", ".join(_short(v) for v in value[:limit])
        return f"[{head}, ... ({len(value)} items)]"
    if isinstance(value, list):
        return "[" + ", ".join(_short(v) for v in value) + "]"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)
