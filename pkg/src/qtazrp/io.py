"""I/O utilities: rates-file loading, result tabulation and export."""

from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from qtazrp.models import CheckRecord, ReportRecord, RateProfile

RECORD_COLUMNS = [
    "method",
    "from",
    "to",
    "t",
    "value",
    "raw",
    "error",
    "converged",
    "nodes",
    "radius",
    "seed",
    "trials",
    "leak",
]


def load_rate_profile(path: str | Path) -> RateProfile:
    """Read a rates file ``{"q": ..., "default_a": ..., "overrides": {"site": a}}``."""
    return RateProfile.model_validate_json(Path(path).read_text())


def dump_rate_profile(profile: RateProfile, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "q": profile.q.q,
        "default_a": profile.default_a,
        "overrides": {str(site): a for site, a in sorted(profile.overrides.items())},
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def _coords(value: list[int] | None) -> str | None:
    return None if value is None else ",".join(str(c) for c in value)


def records_to_frame(records: Sequence[ReportRecord]) -> pd.DataFrame:
    """One row per record; states are rendered in the command-line form."""
    rows = [record.model_dump(by_alias=True) for record in records]
    df = pd.DataFrame(rows, columns=RECORD_COLUMNS)
    df["from"] = df["from"].map(_coords)
    df["to"] = df["to"].map(_coords)
    return df


def checks_to_frame(checks: Sequence[CheckRecord]) -> pd.DataFrame:
    return pd.DataFrame([check.model_dump() for check in checks], columns=list(CheckRecord.model_fields))


def export_results(
    df: pd.DataFrame,
    path: str | Path,
    fmt: str = "csv",
) -> Path:
    """Export a results DataFrame to CSV or Excel.

    Args:
        df: Table from :func:`records_to_frame` or :func:`checks_to_frame`.
        path: Output file path.
        fmt: 'csv' or 'excel'.

    Returns:
        The resolved output Path.
    """
    path = Path(path)
    if fmt == "csv":
        df.to_csv(path, index=False)
    elif fmt == "excel":
        df.to_excel(path, index=False, engine="openpyxl")
    else:
        raise ValueError(f"Unsupported format: {fmt!r}. Use 'csv' or 'excel'.")
    return path
