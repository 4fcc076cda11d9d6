"""
Utility functions for lab runs: logging setup, progress output and
small helpers shared by the check builders.
"""

import logging
import sys
from contextlib import contextmanager
from typing import Iterator, Optional

import orjson
import structlog
from rich.console import Console
from rich.table import Table

from scripts.schema import CheckRecord, ComplexValue

console = Console(stderr=True)


def _orjson_dumps(obj, default=None) -> str:
    return orjson.dumps(obj, default=default).decode()


def configure_logging(level: str = "WARNING", json_output: bool = False) -> None:
    """Route structlog through stdlib logging on stderr, console or JSON rendered."""
    numeric = getattr(logging, str(level).upper(), logging.WARNING)
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=numeric, force=True)
    renderer = (
        structlog.processors.JSONRenderer(serializer=_orjson_dumps)
        if json_output
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


@contextmanager
def status(message: str) -> Iterator[None]:
    """Spinner on stderr while a long computation runs."""
    with console.status(message):
        yield


def check(
    name: str,
    lhs: complex,
    rhs: complex,
    tol: float,
    *,
    abs_err: Optional[float] = None,
    note: str = "",
) -> CheckRecord:
    """
    Build a CheckRecord; abs_err defaults to |lhs - rhs|.

    Non-finite sides are recorded as NaN-free zeros with the failure in the note,
    so a broken computation shows up as a failed check rather than a crash.
    """
    lhs, rhs = complex(lhs), complex(rhs)
    finite = all(map(_finite, (lhs, rhs)))
    if abs_err is None:
        abs_err = abs(lhs - rhs) if finite else float("nan")
    if not finite:
        note = (note + "; " if note else "") + f"non-finite side (lhs={lhs}, rhs={rhs})"
        lhs = lhs if _finite(lhs) else 0j
        rhs = rhs if _finite(rhs) else 0j
    return CheckRecord(
        name=name, lhs=ComplexValue.of(lhs), rhs=ComplexValue.of(rhs), abs_err=abs_err, tol=tol, note=note
    )


def _finite(z: complex) -> bool:
    return z.real == z.real and z.imag == z.imag and abs(z) != float("inf")


def print_checks(checks: list[CheckRecord], title: str = "Checks") -> None:
    """Render check records as a rich table on stderr."""
    table = Table(title=title)
    table.add_column("check")
    table.add_column("lhs", justify="right")
    table.add_column("rhs", justify="right")
    table.add_column("abs_err", justify="right")
    table.add_column("tol", justify="right")
    table.add_column("pass")
    for rec in checks:
        table.add_row(
            rec.name,
            _fmt(rec.lhs.value),
            _fmt(rec.rhs.value),
            "n/a" if rec.abs_err is None else f"{rec.abs_err:.2e}",
            f"{rec.tol:.0e}",
            "[green]yes[/green]" if rec.passed else "[red]NO[/red]",
        )
    console.print(table)


def _fmt(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.10g}"
    return f"{z.real:.8g}{z.imag:+.8g}i"
