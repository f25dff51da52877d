"""Readers for the solver's delimited output files.

Each reader validates the documented column set and reports the first missing
column by name.  No solver code is imported; the CSV files are the interface.
"""

from __future__ import annotations

import csv

import numpy as np

__all__ = ["SchemaError", "read_profile", "read_errors", "read_study"]

PROFILE_COLUMNS = ["x", "u_exact", "u_num", "v_exact", "v_num"]
ERROR_COLUMNS = ["k", "t", "E1", "E2", "dE1", "dE2", "q", "mon_du", "mon_dv", "mon_Au", "mon_Lv"]
STUDY_COLUMNS = ["axis", "value", "tau", "max_E1", "max_E2", "max_dE1", "max_dE2"]


class SchemaError(ValueError):
    """The input file does not match the documented column schema."""


def _read_rows(path: str, expected: list[str]) -> list[dict]:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in expected:
            if column not in header:
                raise SchemaError(f"{path}: missing column {column!r}")
        return list(reader)


def _column(rows: list[dict], name: str) -> np.ndarray:
    return np.array([float(row[name]) if row[name] != "" else np.nan for row in rows])


def read_profile(path: str) -> dict[str, np.ndarray]:
    rows = _read_rows(path, PROFILE_COLUMNS)
    return {name: _column(rows, name) for name in PROFILE_COLUMNS}


def read_errors(path: str) -> dict[str, np.ndarray]:
    rows = _read_rows(path, ERROR_COLUMNS)
    return {name: _column(rows, name) for name in ERROR_COLUMNS}


def read_study(path: str) -> dict[str, np.ndarray | str]:
    rows = _read_rows(path, STUDY_COLUMNS)
    if not rows:
        raise SchemaError(f"{path}: study file has no data rows")
    axes = {row["axis"] for row in rows}
    if len(axes) != 1:
        raise SchemaError(f"{path}: mixed axis values {sorted(axes)}")
    data: dict[str, np.ndarray | str] = {
        name: _column(rows, name) for name in STUDY_COLUMNS[1:]
    }
    data["axis"] = axes.pop()
    return data
