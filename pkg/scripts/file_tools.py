# file_tools.py

import hashlib
import os
from typing import Optional, Sequence

import orjson
import pandas as pd
import structlog

from scripts.config import REPORT_DIR
from scripts.schema import ReportRecord, to_jsonable

log = structlog.get_logger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
CSV_FLOAT_FORMAT = "%.17g"


## Utility Methods
def generate_hash(text: str, length: int = 8) -> str:
    """Generate a short hash from text for unique file naming."""
    return hashlib.md5(text.encode()).hexdigest()[:length]


def run_id(subcommand: str, parameters: dict) -> str:
    """Deterministic id from the canonical (sorted, JSON) parameter set."""
    canonical = orjson.dumps(to_jsonable(parameters), option=orjson.OPT_SORT_KEYS).decode()
    return f"{subcommand}_{generate_hash(canonical)}"


def _disk_path(file_path: str, base_dir: Optional[str] = None) -> str:
    """
    Build the real filesystem path: absolute paths are used as given,
    relative ones land under <LAB_REPORT_DIR>/<file_path>.
    """
    if os.path.isabs(file_path):
        full = file_path
    else:
        full = os.path.join(base_dir or REPORT_DIR, file_path)
    parent = os.path.dirname(full)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return full


def dumps_report(record: ReportRecord) -> bytes:
    """Canonical JSON bytes: sorted keys, shortest round-trip floats."""
    return orjson.dumps(record.model_dump(mode="json"), option=JSON_OPTIONS)


# -------------------------
# Report files
# -------------------------

def ls_reports(path: str = "", base_dir: Optional[str] = None) -> list[str]:
    """Sorted file names in the report folder (or one of its subfolders)."""
    folder = os.path.join(base_dir or REPORT_DIR, path.lstrip("/\\")) if path else (base_dir or REPORT_DIR)
    if not os.path.exists(folder):
        return []
    return sorted(os.listdir(folder))


def write_report(record: ReportRecord, file_path: Optional[str] = None, base_dir: Optional[str] = None) -> str:
    """Write a report as JSON; the default name is <task_id>.json. Returns the path."""
    path = _disk_path(file_path or f"{record.task_id}.json", base_dir)
    with open(path, "wb") as f:
        f.write(dumps_report(record))
    log.info("report_written", path=path, checks=len(record.checks), passed=record.all_passed)
    return path


def read_report(file_path: str, base_dir: Optional[str] = None) -> ReportRecord:
    """Load and validate a JSON report."""
    path = _disk_path(file_path, base_dir)
    with open(path, "rb") as f:
        return ReportRecord.model_validate(orjson.loads(f.read()))


def write_csv(
    rows: Sequence[dict] | pd.DataFrame,
    file_path: str,
    base_dir: Optional[str] = None,
    columns: Optional[list[str]] = None,
) -> str:
    """Write a table with 17 significant digits per float. Returns the path."""
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    path = _disk_path(file_path, base_dir)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    log.info("csv_written", path=path, rows=len(frame))
    return path


def cleanup_reports(base_dir: Optional[str] = None) -> list[str]:
    """
    Delete ALL regular files in the report folder (does not recurse).

    Returns:
        Names of the deleted files (with an error note where removal failed).
    """
    folder = base_dir or REPORT_DIR
    if not os.path.exists(folder):
        return []

    deleted = []
    for name in os.listdir(folder):
        full = os.path.join(folder, name)
        if os.path.isfile(full):
            try:
                os.remove(full)
                deleted.append(name)
            except OSError as e:
                deleted.append(f"{name} (error: {e})")
    return deleted
